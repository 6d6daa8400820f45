#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "stepwise/cli.hpp"

using namespace stepwise;
namespace fs = std::filesystem;

namespace {

std::string sample(const std::string& name) { return std::string(SAMPLES_DIR) + "/" + name; }

RunConfig config(std::vector<std::string> inputs) {
  RunConfig c;
  c.inputs = std::move(inputs);
  return c;
}

struct Shell {
  int code = -1;
  std::string out;
};

Shell shell(const std::string& args) {
  Shell s;
  std::string cmd = std::string(STEPWISE_BIN) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return s;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) s.out.append(buf, n);
  int status = pclose(p);
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return s;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("stepwise-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Run, ExitCodes) {
  EXPECT_EQ(run(config({sample("cantor.tla")})).exit_code, kExitProved);
  EXPECT_EQ(run(config({sample("cantor_omitted.tla")})).exit_code, kExitIncomplete);
  EXPECT_EQ(run(config({sample("take_on_conj.tla")})).exit_code, kExitMeaningless);
  EXPECT_EQ(run(config({sample("does_not_exist.tla")})).exit_code, kExitInternal);
  EXPECT_EQ(run(config({})).exit_code, kExitInternal);
}

TEST(Run, WorstStatusWins) {
  RunResult r = run(config({sample("cantor.tla"), sample("cantor_omitted.tla"), sample("take_on_conj.tla")}));
  EXPECT_EQ(r.exit_code, kExitMeaningless);
  EXPECT_EQ(r.reports.size(), 3u);
}

TEST(Run, UnprovableLeafFails) {
  fs::path dir = scratch("fail");
  fs::path f = dir / "bad.tla";
  std::ofstream(f) << "THEOREM ASSUME NEW p, NEW q PROVE p\nOBVIOUS\n";
  RunResult r = run(config({f.string()}));
  EXPECT_EQ(r.exit_code, kExitFailed);
  EXPECT_EQ(r.reports[0].leaves[0].outcome.status, "unknown");
}

TEST(Run, ParallelOutputIsByteIdentical) {
  RunConfig one = config({sample("cantor.tla"), sample("cantor_omitted.tla")});
  one.format = ReportFormat::Json;
  RunConfig four = one;
  four.jobs = 4;
  EXPECT_EQ(run(one).document, run(four).document);
}

TEST(Run, OnlyRestrictsProvingToASubtree) {
  RunConfig c = config({sample("cantor.tla")});
  c.only = "<1>1.<2>2";
  RunResult r = run(c);
  EXPECT_EQ(r.exit_code, kExitIncomplete);
  for (const auto& l : r.reports[0].leaves)
    EXPECT_EQ(l.outcome.status, path_under(l.path, "<1>1.<2>2") ? "proved" : "skipped") << l.path;
}

TEST(Run, PathPrefixesRespectStepBoundaries) {
  EXPECT_TRUE(path_under("<1>1.<2>2", ""));
  EXPECT_TRUE(path_under("<1>1.<2>2", "<1>1"));
  EXPECT_TRUE(path_under("<1>1", "<1>1"));
  EXPECT_FALSE(path_under("<1>10", "<1>1"));
  EXPECT_FALSE(path_under("<1>1", "<1>1.<2>2"));
}

TEST(Run, TracesAreWrittenPerProvedLeaf) {
  fs::path dir = scratch("traces");
  RunConfig c = config({sample("cantor.tla")});
  c.traces_dir = dir.string();
  ASSERT_EQ(run(c).exit_code, kExitProved);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++files;
    EXPECT_NO_THROW(Trace::parse(oracle::read_file(e.path().string()))) << e.path();
  }
  EXPECT_EQ(files, oracle::kCantorLeaves);
}

TEST(Run, EmbeddingsFile) {
  fs::path dir = scratch("embed");
  RunConfig c = config({sample("cantor.tla")});
  c.mode = RunMode::ExportEmbeddings;
  c.embeddings_path = (dir / "out.txt").string();
  RunResult r = run(c);
  EXPECT_TRUE(r.document.empty());
  std::string doc = oracle::read_file(*c.embeddings_path);
  EXPECT_EQ(std::count(doc.begin(), doc.end(), '\n'), oracle::kCantorLeaves);
}

TEST(Run, ListingShowsEveryLeaf) {
  RunConfig c = config({sample("cantor.tla")});
  c.mode = RunMode::ListObligations;
  RunResult r = run(c);
  EXPECT_NE(r.document.find("<1>1.<2>2.<3>1.<4>1"), std::string::npos);
  EXPECT_NE(r.document.find("|-"), std::string::npos);
}

TEST(Binary, ProvesCantor) {
  Shell s = shell("check " + sample("cantor.tla"));
  EXPECT_EQ(s.code, 0);
  EXPECT_NE(s.out.find("PROVED"), std::string::npos);
}

TEST(Binary, JsonOutputParsesBack) {
  Shell s = shell("check --format json " + sample("cantor_omitted.tla"));
  EXPECT_EQ(s.code, 1);
  ObligationReport r = parse_report(s.out);
  EXPECT_EQ(r.status, RunStatus::Incomplete);
}

TEST(Binary, MeaninglessAndMissingFiles) {
  EXPECT_EQ(shell("check " + sample("take_on_conj.tla")).code, 3);
  EXPECT_EQ(shell("check " + sample("missing.tla")).code, 4);
  EXPECT_EQ(shell("check --no-such-flag " + sample("cantor.tla")).code, 4);
}

TEST(Binary, CheckOnlyAndBudgetFlags) {
  EXPECT_EQ(shell("check --check-only " + sample("cantor.tla")).code, 1);
  EXPECT_EQ(shell("check --depth 12 --timeout-ms 5000 --gamma-reuse 4 --jobs 2 " + sample("cantor.tla")).code, 0);
  EXPECT_EQ(shell("check --prove --check-only " + sample("cantor.tla")).code, 4);
}
