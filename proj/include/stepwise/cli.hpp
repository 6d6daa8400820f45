#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stepwise/export.hpp"
#include "stepwise/prover.hpp"

namespace stepwise {

enum class RunMode { CheckOnly, Prove, ListObligations, ExportEmbeddings };

struct RunConfig {
  std::vector<std::string> inputs;
  RunMode mode = RunMode::Prove;
  Budget budget;
  ReportFormat format = ReportFormat::Text;
  std::optional<std::string> out;              // report file; stdout when unset
  std::optional<std::string> embeddings_path;  // also written in other modes
  std::optional<std::string> traces_dir;
  bool local_defs_usable = true;
  bool expand_filtered = true;
  std::string only;  // prove just the leaves under this step path
  unsigned jobs = 1;
  bool timings = false;
};

enum ExitCode : int {
  kExitProved = 0,
  kExitIncomplete = 1,
  kExitFailed = 2,
  kExitMeaningless = 3,
  kExitInternal = 4,
};

int exit_code_for(RunStatus s);

struct RunResult {
  int exit_code = kExitProved;
  std::vector<ObligationReport> reports;
  std::string document;     // what goes to stdout (or --out)
  std::string diagnostics;  // warnings and I/O problems, for stderr
};

/// Checks one theorem given as source text. `name` is used when the theorem
/// is anonymous.
ObligationReport check_source(const std::string& source, const std::string& name, const RunConfig& config,
                              std::vector<Obligation>* filtered_out = nullptr,
                              std::vector<std::string>* warnings = nullptr,
                              std::vector<std::pair<std::string, Trace>>* traces = nullptr);

/// Reads every input, checks (and proves, per mode) each theorem, writes the
/// side outputs the config asks for, and assembles the report document.
RunResult run(const RunConfig& config);

/// True when `path` is `prefix` or lies below it.
bool path_under(const std::string& path, const std::string& prefix);

}  // namespace stepwise
