#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stepwise/meta.hpp"

namespace stepwise {

/// Prover input: declared constants, hypotheses and a goal, with no
/// definitions and nothing hidden.
struct Sequent {
  std::vector<std::string> signature;
  std::vector<ExprPtr> hypotheses;
  ExprPtr goal;
};

class MalformedSequent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filters, expands every definition, then reads declarations as the
/// signature and facts as hypotheses. Throws MalformedSequent.
Sequent make_sequent(const Obligation& o);

std::string to_string(const Sequent& s);

struct Budget {
  int max_depth = 12;     // instantiations (gamma steps and fallback bindings) per branch
  int timeout_ms = 5000;
  int gamma_reuse = 4;    // instances per universal formula on one branch
};

/// Rewrites a formula into the shape the tableau works on: bounded
/// quantifiers become guarded ones, one binder per quantifier, ~~ removed,
/// # and \notin turned into negations.
ExprPtr normalize(const ExprPtr& e);

/// The tableau's starting formulas: normalized hypotheses, then the
/// normalized negated goal.
std::vector<ExprPtr> initial_formulas(const Sequent& s);

struct TraceLine {
  enum class Kind { Init, Expand, Split, Close, Bind };

  Kind kind = Kind::Init;
  std::string rule;
  int branch = 0;
  int principal = -1;
  ExprPtr term;  // gamma instance, delta witness, bound value
  std::vector<std::pair<int, ExprPtr>> out;
  int left = -1, right = -1;  // Split
  std::vector<std::pair<int, ExprPtr>> right_out;
  std::vector<int> ids;  // Close: the clashing formulas
  std::vector<int> eqs;  // Close: equalities the congruence closure may use
  std::string var;       // Bind
};

struct Trace {
  std::vector<TraceLine> lines;

  std::string to_text() const;
  /// Throws std::invalid_argument on malformed text.
  static Trace parse(const std::string& text);
};

struct ProverStats {
  long nodes = 0;
  int levels_tried = 0;
  long millis = 0;
};

struct ProverOutcome {
  enum class Status { Proved, Unknown, Malformed };

  Status status = Status::Unknown;
  Trace trace;
  std::string reason;
  ProverStats stats;
  int depth = 0;  // 1 + expansion steps on the longest branch of the closed tableau
};

std::string to_string(ProverOutcome::Status s);

ProverOutcome prove(const Sequent& s, const Budget& b = {});
ProverOutcome prove(const Obligation& o, const Budget& b = {});

struct TraceVerdict {
  bool ok = false;
  std::string diagnostic;  // first failure when !ok
};

/// Replays a ground trace against the sequent: every line must apply a
/// legal rule to a formula on its branch, and every branch must close.
TraceVerdict replay_trace(const Sequent& s, const Trace& t);
bool check_trace(const Sequent& s, const Trace& t);

}  // namespace stepwise
