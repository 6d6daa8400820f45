#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace stepwise {

struct SourcePos {
  int line = 0;
  int column = 0;
};

enum class ExprKind {
  Ident,
  Apply,     // operator application P(a, b)
  Bool,
  Forall,
  Exists,
  Not,
  And,
  Or,
  Implies,
  Equiv,
  Eq,
  Neq,
  In,
  NotIn,
  Subseteq,
  Powerset,
  SetFilter,  // {x \in S : P}
  SetMap,     // {d : x \in S}
  SetEnum,    // {a, b, ...}
  FcnApply,   // f[x]
  FcnSpace,   // [S -> T]
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// One element of a binder list: `x` or `x \in domain`.
struct Binder {
  std::string name;
  ExprPtr domain;  // null when unbounded
};

/// Immutable expression node. Operands live in `args`; for binding forms
/// (quantifiers, SetFilter, SetMap) `args[0]` is the body and the binders
/// are in `binders`. Binder domains are scoped outside the binder list.
struct Expr {
  ExprKind kind = ExprKind::Bool;
  std::string name;
  bool value = false;
  std::vector<Binder> binders;
  std::vector<ExprPtr> args;
  SourcePos pos;

  bool is(ExprKind k) const { return kind == k; }
  const ExprPtr& arg(std::size_t i) const { return args.at(i); }
  const ExprPtr& body() const { return args.at(0); }
};

class ArityMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace build {
ExprPtr ident(std::string name, SourcePos pos = {});
ExprPtr apply(std::string op, std::vector<ExprPtr> args, SourcePos pos = {});
ExprPtr boolean(bool v, SourcePos pos = {});
ExprPtr forall(std::vector<Binder> binders, ExprPtr body, SourcePos pos = {});
ExprPtr exists(std::vector<Binder> binders, ExprPtr body, SourcePos pos = {});
ExprPtr quantifier(ExprKind kind, std::vector<Binder> binders, ExprPtr body, SourcePos pos = {});
ExprPtr negate(ExprPtr e, SourcePos pos = {});
ExprPtr binary(ExprKind kind, ExprPtr a, ExprPtr b, SourcePos pos = {});
ExprPtr conj(ExprPtr a, ExprPtr b);
ExprPtr disj(ExprPtr a, ExprPtr b);
ExprPtr implies(ExprPtr a, ExprPtr b);
ExprPtr equiv(ExprPtr a, ExprPtr b);
ExprPtr eq(ExprPtr a, ExprPtr b);
ExprPtr in(ExprPtr a, ExprPtr b);
ExprPtr subseteq(ExprPtr a, ExprPtr b);
ExprPtr powerset(ExprPtr s, SourcePos pos = {});
ExprPtr set_filter(Binder binder, ExprPtr pred, SourcePos pos = {});
ExprPtr set_map(ExprPtr image, std::vector<Binder> binders, SourcePos pos = {});
ExprPtr set_enum(std::vector<ExprPtr> elems, SourcePos pos = {});
ExprPtr fcn_apply(ExprPtr f, ExprPtr x, SourcePos pos = {});
ExprPtr fcn_space(ExprPtr dom, ExprPtr cod, SourcePos pos = {});
/// Rebuilds `e` with new operands and binders, keeping kind, name and position.
ExprPtr with_parts(const Expr& e, std::vector<Binder> binders, std::vector<ExprPtr> args);
}  // namespace build

bool is_binding_form(ExprKind k);
bool is_set_constructor(const Expr& e);

std::string to_string(const ExprPtr& e);

/// Structural equality modulo renaming of bound identifiers.
bool alpha_equal(const ExprPtr& a, const ExprPtr& b);

/// A string that is equal for two expressions iff they are alpha-equivalent.
std::string canonical_key(const ExprPtr& e);

/// Identifiers (including operator names) with at least one free occurrence.
std::set<std::string> free_identifiers(const ExprPtr& e);

/// Every identifier occurring in `e`, bound or free.
void collect_identifiers(const ExprPtr& e, std::set<std::string>& out);

/// `base` with the smallest numeric suffix (after stripping any existing one)
/// that is not in `avoid`. Returns `base` itself when it is not in `avoid`
/// and `allow_self` is set.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid,
                       bool allow_self = false);

/// Capture-avoiding simultaneous substitution of identifiers.
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& sub);
ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& u);

/// Replaces every free use of operator `op` by its definition: a bare `op`
/// (when `params` is empty) or `op(a1..an)` becomes `body[params := args]`.
/// Throws ArityMismatch on a use with the wrong number of arguments.
ExprPtr expand_operator(const ExprPtr& e, const std::string& op,
                        const std::vector<std::string>& params, const ExprPtr& body);

/// Replaces free occurrences of the nullary identifier `name` by `replacement`
/// (capture-avoiding). Applications `name(...)` throw ArityMismatch.
ExprPtr replace_constant(const ExprPtr& e, const std::string& name, const ExprPtr& replacement);

/// Splits `Q b1, b2, ... : body` into the first binder and the remaining
/// quantified expression (or the body when only one binder remains).
std::pair<Binder, ExprPtr> peel_binder(const ExprPtr& quantified);

}  // namespace stepwise
