#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stepwise/engine.hpp"
#include "stepwise/meta.hpp"
#include "stepwise/prover.hpp"

namespace stepwise {

enum class RunStatus { Proved, Incomplete, Failed, Meaningless };

std::string to_string(RunStatus s);
std::optional<RunStatus> run_status_from_string(const std::string& s);

/// What happened to one leaf. `status` is one of proved, unknown, malformed,
/// omitted (never sent to the prover) or skipped (not attempted this run).
struct LeafOutcome {
  std::string status;
  int depth = 0;
  std::string reason;

  bool operator==(const LeafOutcome&) const = default;
};

struct LeafReport {
  int id = 0;
  std::string path;
  std::string kind;
  bool omitted = false;
  std::string obligation;  // raw, one assumption per line
  std::string filtered;    // filtered, usable definitions expanded unless asked otherwise
  std::string embedding;
  LeafOutcome outcome;
  long millis = 0;

  bool operator==(const LeafReport&) const = default;
};

struct ReportError {
  std::string path;
  int line = 0;
  int column = 0;
  std::string message;

  bool operator==(const ReportError&) const = default;
};

struct ObligationReport {
  std::string theorem;
  RunStatus status = RunStatus::Proved;
  std::vector<LeafReport> leaves;
  std::vector<ReportError> errors;

  bool operator==(const ObligationReport&) const = default;
};

/// Errors win, then any leaf the prover could not close, then omitted or
/// skipped leaves; otherwise everything was proved.
RunStatus summarize(const std::vector<LeafReport>& leaves, const std::vector<ReportError>& errors);

struct LeafViewOptions {
  bool expand_filtered = true;
};

/// The obligation as the prover sees it: filtered, and with usable
/// definitions expanded when `expand` is set.
Obligation filtered_view(const Obligation& o, bool expand = true);

/// Fills every field but the outcome and timing.
LeafReport describe_leaf(int id, const LeafRecord& leaf, const LeafViewOptions& opts = {});

enum class ReportFormat { Json, Text };

std::string write_report(const ObligationReport& r, ReportFormat f);
std::string write_reports(const std::vector<ObligationReport>& rs, ReportFormat f);

/// Inverse of write_report(..., Json). Throws std::invalid_argument.
ObligationReport parse_report(const std::string& json);

/// One embedding per line, in the order given.
std::string write_embeddings(const std::vector<Obligation>& obligations);
void write_embeddings(const std::vector<Obligation>& obligations, std::ostream& out);

}  // namespace stepwise
