#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stepwise/expr.hpp"

namespace stepwise {

/// Raised for any syntax error; carries the position and the set of tokens
/// that would have been accepted there.
class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, std::string message, std::set<std::string> expected = {});

  SourcePos pos() const { return pos_; }
  const std::set<std::string>& expected() const { return expected_; }
  const std::string& detail() const { return detail_; }

 private:
  SourcePos pos_;
  std::string detail_;
  std::set<std::string> expected_;
};

/// Step level numbers that violate the nesting discipline of non-leaf proofs.
class LevelError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// `<n>` or `<n>label`. Level 0 is reserved for internal use.
struct StepToken {
  int level = 0;
  std::string label;
  SourcePos pos;

  bool labeled() const { return !label.empty(); }
  std::string text() const;
  friend bool operator==(const StepToken& a, const StepToken& b) {
    return a.level == b.level && a.label == b.label;
  }
};

/// Shared grammar of `BY`, `USE` and `HIDE`: facts followed by `DEF` names.
struct FactList {
  std::vector<ExprPtr> facts;
  std::vector<std::string> defs;
};

/// One entry of an ASSUME clause: `NEW x`, `NEW x \in S`, or a fact.
struct AssumeItem {
  bool is_new = false;
  Binder binder;  // when is_new
  ExprPtr fact;   // otherwise
};

/// Either a plain expression or an ASSUME ... PROVE form.
struct GoalForm {
  bool has_assume = false;
  std::vector<AssumeItem> assume;
  ExprPtr goal;
};

struct WitnessItem {
  ExprPtr term;
  ExprPtr domain;  // `w \in T` when non-null
};

struct Proof;
using ProofPtr = std::shared_ptr<const Proof>;

struct ProofStep {
  enum class Kind { Use, Hide, Define, Have, Take, Witness, Assert, Suffices, Pick, Case, Qed };

  Kind kind = Kind::Qed;
  FactList facts;                       // Use, Hide
  std::string def_name;                 // Define
  std::vector<std::string> def_params;  // Define
  ExprPtr expr;                         // Define body, Have, Case, Pick body
  std::vector<Binder> binders;          // Take, Pick
  std::vector<WitnessItem> witnesses;   // Witness
  GoalForm goal;                        // Assert, Suffices
  ProofPtr proof;                       // Assert, Suffices, Pick, Case, Qed
  SourcePos pos;

  bool takes_proof() const;
};

struct Proof {
  enum class Kind { Obvious, Omitted, By, Steps };

  Kind kind = Kind::Omitted;
  FactList by;
  std::vector<std::pair<StepToken, ProofStep>> steps;
  /// Set when the source gave no proof at all and OMITTED was assumed.
  bool implicit = false;
  SourcePos pos;

  bool is_leaf() const { return kind != Kind::Steps; }
  int level() const { return steps.empty() ? 0 : steps.front().first.level; }
};

struct Theorem {
  std::string name;  // empty when anonymous
  GoalForm goal;
  ProofPtr proof;
  SourcePos pos;
};

enum class TokenKind {
  Ident,
  Keyword,
  Step,     // <n> or <n>label, optionally followed by '.'
  Symbol,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;   // identifier, keyword or symbol spelling
  int level = 0;      // Step
  std::string label;  // Step
  bool dotted = false;  // Step: written `<n>l.`
  SourcePos pos;
};

std::vector<Token> lex(std::string_view source);

Theorem parse_theorem(std::string_view source);
ExprPtr parse_expression(std::string_view source);

/// Checks the level discipline of an already-built proof tree (used on
/// programmatically constructed proofs; the parser enforces it while reading).
void validate_levels(const Proof& proof, int enclosing_level = 0);

std::string to_string(const GoalForm& g);
std::string to_string(const Theorem& t);
std::string to_string(const Proof& p, int indent = 0);

}  // namespace stepwise
