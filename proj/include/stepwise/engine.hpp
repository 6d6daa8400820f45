#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stepwise/meta.hpp"
#include "stepwise/surface.hpp"

namespace stepwise {

enum class LeafKind {
  ObviousGoal,
  ByGoal,
  UseFactSide,
  TakeSubsetSide,
  WitnessSubsetSide,
  WitnessMembershipSide,
  HaveSide,
  PickExistence,
};

std::string to_string(LeafKind k);
std::optional<LeafKind> leaf_kind_from_string(const std::string& s);

/// Where something came from: the chain of step tokens from the theorem down,
/// e.g. <1>1.<2>2.<3>1.<4>1. Unlabeled tokens print as <n>(k), k being the
/// step's position in its proof.
struct Provenance {
  std::vector<std::string> path;
  SourcePos pos;

  std::string path_text() const;
};

struct LeafRecord {
  Obligation obligation;
  Provenance origin;
  LeafKind kind = LeafKind::ObviousGoal;
  bool omitted = false;
};

struct Derivation {
  std::string rule;  // OBVIOUS, BY, non-QED, USE1, TAKE2, ASSERT2, ... or "leaf"
  Obligation input;
  std::optional<Obligation> output;  // set for transformations
  Provenance origin;
  std::vector<Derivation> children;
  std::optional<LeafRecord> leaf;
};

class MeaninglessError : public std::runtime_error {
 public:
  MeaninglessError(std::string path, SourcePos pos, std::string message);
  const std::string& path() const { return path_; }
  SourcePos pos() const { return pos_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string path_;
  SourcePos pos_;
  std::string detail_;
};

class DuplicateName : public MeaninglessError {
 public:
  using MeaninglessError::MeaninglessError;
};

class UnknownFact : public MeaninglessError {
 public:
  using MeaninglessError::MeaninglessError;
};

struct Diagnostic {
  std::string path;
  SourcePos pos;
  std::string message;
};

struct EngineOptions {
  /// Proof-local DEFINEs are followed by an implicit USE DEFS of the new name.
  bool local_defs_usable = true;
};

struct CheckResult {
  Obligation root;
  Derivation derivation;
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  bool meaningful() const { return errors.empty(); }
};

/// The obligation a theorem asserts. Identifiers free in the statement are
/// declared up front, in sorted order.
Obligation root_obligation(const Theorem& t);

/// Checks `p` against `o`, collecting every meaningfulness error; a failing
/// step leaves the obligation unrefined and checking carries on.
CheckResult check_claim_collect(const Proof& p, const Obligation& o, const EngineOptions& opts = {});
CheckResult check_theorem(const Theorem& t, const EngineOptions& opts = {});

/// Throws the first MeaninglessError instead of collecting.
Derivation check_claim(const Proof& p, const Obligation& o, const EngineOptions& opts = {});

struct StepResult {
  Derivation derivation;  // the transformation node; its output is the refined obligation
  std::vector<LeafRecord> leaves;
};

/// Applies one non-QED step. Throws MeaninglessError when no rule matches.
StepResult transform_step(const StepToken& token, const ProofStep& step, const Obligation& o,
                          const EngineOptions& opts = {});

/// Unfolds usable definitions at the head of the goal until a quantifier or
/// implication shows up (or nothing more can be unfolded).
Obligation expand_for_matching(const Obligation& o);

std::vector<LeafRecord> leaf_obligations(const Derivation& d);

/// Indented dump of the derivation tree; equal trees give equal text.
std::string to_string(const Derivation& d);

}  // namespace stepwise
