#include <iostream>

#include <CLI11.hpp>

#include "stepwise/cli.hpp"

int main(int argc, char** argv) {
  using namespace stepwise;

  CLI::App app{"Checks hierarchical proofs and discharges their obligations."};
  app.require_subcommand(1);
  CLI::App* check = app.add_subcommand("check", "check theorem files");

  RunConfig config;
  std::string mode = "prove";
  std::string format = "text";
  std::string out, embeddings, traces;
  bool local_defs_hidden = false;
  bool show_unexpanded = false;

  check->add_option("files", config.inputs, "theorem files")->required();
  auto* modes = check->add_option_group("mode");
  modes->add_flag_callback("--prove", [&] { mode = "prove"; }, "prove every leaf obligation (default)");
  modes->add_flag_callback("--check-only", [&] { mode = "check-only"; }, "check structure only, prove nothing");
  modes->add_flag_callback("--list-obligations", [&] { mode = "list-obligations"; },
                           "print each leaf obligation without proving");
  modes->add_option("--mode", mode, "check-only | prove | list-obligations | export-embeddings")
      ->check(CLI::IsMember({"check-only", "prove", "list-obligations", "export-embeddings"}));
  modes->require_option(0, 1);

  check->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "text"}));
  check->add_option("--out", out, "write the report here instead of stdout");
  check->add_option("--emit-embeddings", embeddings, "write one embedding per leaf to this file");
  check->add_option("--emit-traces", traces, "write a trace file per proved leaf into this directory");
  check->add_option("--timeout-ms", config.budget.timeout_ms, "wall-clock limit per leaf")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  check->add_option("--depth", config.budget.max_depth, "instantiations allowed per branch")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  check->add_option("--gamma-reuse", config.budget.gamma_reuse, "instances per universal formula")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  check->add_option("--jobs", config.jobs, "leaves proved in parallel")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  check->add_flag("--local-defs-usable{true}", config.local_defs_usable,
                  "proof-local DEFINEs are usable (default true)");
  check->add_flag("--local-defs-hidden", local_defs_hidden, "proof-local DEFINEs start hidden");
  check->add_flag("--show-unexpanded", show_unexpanded, "show filtered obligations before definition expansion");
  check->add_option("--only", config.only, "prove only leaves under this step path, e.g. <1>1.<2>2");
  check->add_flag("--timings", config.timings, "report time per leaf (makes output run-dependent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInternal;
  }

  if (mode == "check-only") config.mode = RunMode::CheckOnly;
  else if (mode == "list-obligations") config.mode = RunMode::ListObligations;
  else if (mode == "export-embeddings") config.mode = RunMode::ExportEmbeddings;
  else config.mode = RunMode::Prove;
  config.format = format == "json" ? ReportFormat::Json : ReportFormat::Text;
  if (!out.empty()) config.out = out;
  if (!embeddings.empty()) config.embeddings_path = embeddings;
  if (!traces.empty()) config.traces_dir = traces;
  if (local_defs_hidden) config.local_defs_usable = false;
  config.expand_filtered = !show_unexpanded;

  RunResult r = run(config);
  std::cout << r.document;
  std::cerr << r.diagnostics;
  return r.exit_code;
}
