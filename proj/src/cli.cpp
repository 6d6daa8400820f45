#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "stepwise/cli.hpp"
#include "stepwise/engine.hpp"
#include "stepwise/surface.hpp"

namespace stepwise {

namespace fs = std::filesystem;

int exit_code_for(RunStatus s) {
  switch (s) {
    case RunStatus::Proved:
      return kExitProved;
    case RunStatus::Incomplete:
      return kExitIncomplete;
    case RunStatus::Failed:
      return kExitFailed;
    case RunStatus::Meaningless:
      return kExitMeaningless;
  }
  return kExitInternal;
}

bool path_under(const std::string& path, const std::string& prefix) {
  if (prefix.empty()) return true;
  if (path.compare(0, prefix.size(), prefix) != 0) return false;
  return path.size() == prefix.size() || path[prefix.size()] == '.';
}

namespace {

struct Job {
  std::size_t leaf;
  Obligation obligation;
};

void prove_all(const std::vector<Job>& jobs, const RunConfig& config, std::vector<ProverOutcome>& out) {
  out.assign(jobs.size(), {});
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = prove(jobs[i].obligation, config.budget);
  };
  unsigned n = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(jobs.size())));
  if (n <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

std::string trace_file_name(const std::string& theorem, const LeafReport& leaf) {
  std::string stem = theorem.empty() ? "theorem" : theorem;
  for (char& c : stem)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  return stem + "-" + std::to_string(leaf.id) + ".trace";
}

std::string listing(const ObligationReport& r) {
  std::ostringstream os;
  os << "theorem " << (r.theorem.empty() ? "(unnamed)" : r.theorem) << ": " << r.leaves.size() << " leaves\n";
  for (const auto& e : r.errors) os << "  error " << e.path << " (" << e.line << ":" << e.column << "): " << e.message << "\n";
  for (const auto& l : r.leaves) {
    os << "[" << l.id << "] " << (l.path.empty() ? "(theorem)" : l.path) << " " << l.kind
       << (l.omitted ? " omitted" : "") << "\n";
    std::istringstream lines(l.filtered);
    std::string line;
    while (std::getline(lines, line)) os << "    " << line << "\n";
  }
  return os.str();
}

}  // namespace

ObligationReport check_source(const std::string& source, const std::string& name, const RunConfig& config,
                              std::vector<Obligation>* filtered_out, std::vector<std::string>* warnings,
                              std::vector<std::pair<std::string, Trace>>* traces) {
  ObligationReport report;
  report.theorem = name;
  Theorem theorem;
  try {
    theorem = parse_theorem(source);
  } catch (const ParseError& e) {
    report.errors.push_back({"", e.pos().line, e.pos().column, e.what()});
    report.status = summarize(report.leaves, report.errors);
    return report;
  }
  if (!theorem.name.empty()) report.theorem = theorem.name;

  EngineOptions opts;
  opts.local_defs_usable = config.local_defs_usable;
  CheckResult checked = check_theorem(theorem, opts);
  for (const auto& e : checked.errors) report.errors.push_back({e.path, e.pos.line, e.pos.column, e.message});
  if (warnings)
    for (const auto& w : checked.warnings)
      warnings->push_back(report.theorem + ": " + (w.path.empty() ? "" : w.path + ": ") + w.message);

  LeafViewOptions view;
  view.expand_filtered = config.expand_filtered;
  std::vector<LeafRecord> leaves = leaf_obligations(checked.derivation);
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    report.leaves.push_back(describe_leaf(static_cast<int>(i + 1), leaves[i], view));
    if (filtered_out) filtered_out->push_back(filtered_view(leaves[i].obligation, config.expand_filtered));
    bool wanted = config.mode == RunMode::Prove && checked.meaningful() && !leaves[i].omitted &&
                  path_under(report.leaves.back().path, config.only);
    if (wanted) jobs.push_back({i, leaves[i].obligation});
  }

  std::vector<ProverOutcome> outcomes;
  prove_all(jobs, config, outcomes);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    LeafReport& leaf = report.leaves[jobs[j].leaf];
    const ProverOutcome& o = outcomes[j];
    leaf.outcome.status = to_string(o.status);
    leaf.outcome.depth = o.status == ProverOutcome::Status::Proved ? o.depth : 0;
    leaf.outcome.reason = o.reason;
    leaf.millis = config.timings ? std::max(1L, o.stats.millis) : 0;
    if (traces && o.status == ProverOutcome::Status::Proved)
      traces->emplace_back(trace_file_name(report.theorem, leaf), o.trace);
  }
  report.status = summarize(report.leaves, report.errors);
  return report;
}

RunResult run(const RunConfig& config) {
  RunResult result;
  std::vector<Obligation> filtered;
  std::vector<std::pair<std::string, Trace>> traces;
  bool internal_error = false;

  if (config.inputs.empty()) {
    result.diagnostics += "no input files\n";
    result.exit_code = kExitInternal;
    return result;
  }
  if (config.budget.max_depth < 0 || config.budget.timeout_ms <= 0 || config.budget.gamma_reuse <= 0) {
    result.diagnostics += "budget values must be positive\n";
    result.exit_code = kExitInternal;
    return result;
  }

  for (const auto& path : config.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      result.diagnostics += "cannot read " + path + "\n";
      internal_error = true;
      continue;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    std::vector<std::string> warnings;
    try {
      result.reports.push_back(check_source(buf.str(), fs::path(path).stem().string(), config, &filtered,
                                            &warnings, config.traces_dir ? &traces : nullptr));
    } catch (const std::exception& e) {
      result.diagnostics += path + ": internal error: " + e.what() + "\n";
      internal_error = true;
      continue;
    }
    for (const auto& w : warnings) result.diagnostics += path + ": warning: " + w + "\n";
  }

  auto write_file = [&](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) {
      result.diagnostics += "cannot write " + p.string() + "\n";
      internal_error = true;
    }
  };

  if (config.traces_dir) {
    std::error_code ec;
    fs::create_directories(*config.traces_dir, ec);
    if (ec) {
      result.diagnostics += "cannot create " + *config.traces_dir + ": " + ec.message() + "\n";
      internal_error = true;
    } else {
      for (const auto& [file, trace] : traces) write_file(fs::path(*config.traces_dir) / file, trace.to_text());
    }
  }

  std::string embeddings;
  if (config.embeddings_path || config.mode == RunMode::ExportEmbeddings) {
    try {
      embeddings = write_embeddings(filtered);
    } catch (const std::exception& e) {
      result.diagnostics += std::string("cannot embed: ") + e.what() + "\n";
      internal_error = true;
    }
    if (config.embeddings_path) write_file(*config.embeddings_path, embeddings);
  }

  if (config.mode == RunMode::ExportEmbeddings && !config.embeddings_path) {
    result.document = embeddings;
  } else if (config.mode == RunMode::ListObligations && config.format == ReportFormat::Text) {
    for (const auto& r : result.reports) result.document += listing(r);
  } else if (config.mode != RunMode::ExportEmbeddings) {
    result.document = write_reports(result.reports, config.format);
  }
  if (config.out) {
    write_file(*config.out, result.document);
    result.document.clear();
  }

  int code = kExitProved;
  for (const auto& r : result.reports) code = std::max(code, exit_code_for(r.status));
  if (internal_error) code = kExitInternal;
  result.exit_code = code;
  return result;
}

}  // namespace stepwise
