#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stepwise/expr.hpp"

namespace stepwise {

struct Obligation;
using ObligationPtr = std::shared_ptr<const Obligation>;

/// Right-hand side of a definition: an obligation or LAMBDA params : body.
struct Definable {
  ObligationPtr obligation;  // set for obligation definables
  std::vector<std::string> params;
  ExprPtr body;

  static Definable lambda(std::vector<std::string> params, ExprPtr body);
  static Definable of(ObligationPtr o);
  bool is_obligation() const { return obligation != nullptr; }
};

struct Assumption {
  enum class Kind { New, Def, Fact };

  Kind kind = Kind::New;
  std::string name;    // New, Def
  Definable def;       // Def
  ObligationPtr fact;  // Fact
  bool hidden = false;  // Def, Fact

  static Assumption declare(std::string name);
  static Assumption define(std::string name, Definable d, bool hidden = false);
  static Assumption assume(ObligationPtr o, bool hidden = false);
  static Assumption assume(ExprPtr e, bool hidden = false);

  bool binds() const { return kind != Kind::Fact; }
};

using Context = std::vector<Assumption>;

struct Obligation {
  Context context;
  ExprPtr goal;
};

ObligationPtr make_obligation(Context c, ExprPtr goal);
/// The obligation with empty context, which stands for the expression itself.
ObligationPtr plain(ExprPtr e);
bool is_plain(const Obligation& o);

class MetaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DuplicateBinder : public MetaError {
 public:
  using MetaError::MetaError;
};
class UnknownOperator : public MetaError {
 public:
  using MetaError::MetaError;
};
class NotWellFormed : public MetaError {
 public:
  using MetaError::MetaError;
};

Context unhide(const Context& c);
Context using_defs(const Context& c, const std::set<std::string>& names);
Context hiding_defs(const Context& c, const std::set<std::string>& names);

/// `x` gives NEW x; `x \in S` gives NEW x followed by the fact x \in S.
Context reflect_binders(const std::vector<Binder>& bs);

/// Names bound at the top level of `c`.
std::set<std::string> bound_names(const Context& c);
bool is_bound(const Context& c, const std::string& name);

/// Deletes hidden facts and turns hidden definitions into declarations,
/// at every nesting depth.
Obligation filter(const Obligation& o);
bool has_hidden(const Obligation& o);

/// Replaces the operator `name` by its definition in every later assumption
/// and in the goal. The definition itself stays. A fact that is exactly the
/// label of an obligation definable is replaced by that obligation.
Obligation expand_definition(const Obligation& o, const std::string& name);

/// Expands every remaining definition left to right and removes it.
Obligation expand_all_definitions(const Obligation& o);

/// Expands only usable definitions (hidden ones are left alone) and removes them.
Obligation expand_usable_definitions(const Obligation& o);

/// Reads an obligation as a single formula: NEW becomes a universal, a fact
/// becomes an implication premise, definitions are expanded away.
ExprPtr obligation_formula(const Obligation& o);

std::set<std::string> free_identifiers(const Obligation& o);

/// Closedness plus the no-rebinding rule for every context, including nested ones.
/// `outer` lists names bound by enclosing scopes. Throws NotWellFormed.
void check_well_formed(const Obligation& o, const std::set<std::string>& outer = {});
bool is_well_formed(const Obligation& o);

/// Structural equality up to renaming of bound expression variables.
bool alpha_equal(const Obligation& a, const Obligation& b);

std::string embed(const Obligation& o);
std::string embed(const Definable& d);

std::string to_string(const Obligation& o);
std::string to_string(const Assumption& a);
std::string to_string(const Definable& d);
/// One assumption per line, goal after a `|-` line.
std::string to_pretty_string(const Obligation& o);

}  // namespace stepwise
