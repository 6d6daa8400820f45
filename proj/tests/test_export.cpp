#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "stepwise/cli.hpp"
#include "stepwise/export.hpp"
#include "stepwise/surface.hpp"

using namespace stepwise;

namespace {

std::string sample(const std::string& name) { return oracle::read_file(std::string(SAMPLES_DIR) + "/" + name); }

ObligationReport checked(const std::string& name, RunMode mode = RunMode::Prove) {
  RunConfig c;
  c.mode = mode;
  return check_source(sample(name), name, c);
}

LeafReport leaf(std::string status, bool omitted = false) {
  LeafReport l;
  l.outcome.status = std::move(status);
  l.omitted = omitted;
  return l;
}

}  // namespace

TEST(Status, Names) {
  for (RunStatus s : {RunStatus::Proved, RunStatus::Incomplete, RunStatus::Failed, RunStatus::Meaningless})
    EXPECT_EQ(run_status_from_string(to_string(s)), s);
  EXPECT_FALSE(run_status_from_string("proved").has_value());
}

TEST(Status, Summary) {
  EXPECT_EQ(summarize({leaf("proved"), leaf("proved")}, {}), RunStatus::Proved);
  EXPECT_EQ(summarize({leaf("proved"), leaf("omitted", true)}, {}), RunStatus::Incomplete);
  EXPECT_EQ(summarize({leaf("proved"), leaf("skipped")}, {}), RunStatus::Incomplete);
  EXPECT_EQ(summarize({leaf("omitted", true), leaf("unknown")}, {}), RunStatus::Failed);
  EXPECT_EQ(summarize({leaf("malformed")}, {}), RunStatus::Failed);
  EXPECT_EQ(summarize({leaf("unknown")}, {ReportError{"<1>1", 1, 1, "bad"}}), RunStatus::Meaningless);
  EXPECT_EQ(summarize({}, {}), RunStatus::Proved);
}

TEST(Status, ExitCodes) {
  EXPECT_EQ(exit_code_for(RunStatus::Proved), 0);
  EXPECT_EQ(exit_code_for(RunStatus::Incomplete), 1);
  EXPECT_EQ(exit_code_for(RunStatus::Failed), 2);
  EXPECT_EQ(exit_code_for(RunStatus::Meaningless), 3);
}

TEST(Report, CantorIsProvedWithAllLeaves) {
  ObligationReport r = checked("cantor.tla");
  EXPECT_EQ(r.status, RunStatus::Proved);
  ASSERT_EQ(r.leaves.size(), static_cast<std::size_t>(oracle::kCantorLeaves));
  for (std::size_t i = 0; i < r.leaves.size(); ++i) {
    EXPECT_EQ(r.leaves[i].id, static_cast<int>(i + 1));
    EXPECT_EQ(r.leaves[i].outcome.status, "proved");
    EXPECT_GT(r.leaves[i].outcome.depth, 0);
    EXPECT_EQ(r.leaves[i].millis, 0);
  }
  EXPECT_EQ(r.leaves.front().path, "<1>1.<2>2.<3>1.<4>1");
  EXPECT_EQ(r.leaves.back().path, "<1>2");
}

TEST(Report, JsonRoundTrip) {
  for (const char* name : {"cantor.tla", "cantor_omitted.tla", "take_on_conj.tla"}) {
    ObligationReport r = checked(name);
    std::string text = write_report(r, ReportFormat::Json);
    EXPECT_EQ(parse_report(text), r) << name;
    EXPECT_EQ(write_report(parse_report(text), ReportFormat::Json), text);
  }
}

TEST(Report, JsonShape) {
  auto j = nlohmann::json::parse(write_report(checked("cantor_omitted.tla"), ReportFormat::Json));
  EXPECT_EQ(j["status"], "INCOMPLETE");
  ASSERT_TRUE(j["leaves"].is_array());
  const auto& first = j["leaves"][0];
  for (const char* k : {"id", "path", "kind", "omitted", "obligation", "filtered", "embedding", "outcome", "millis"})
    EXPECT_TRUE(first.contains(k)) << k;
  EXPECT_TRUE(first["outcome"].contains("status"));
  EXPECT_TRUE(j["errors"].is_array());
}

TEST(Report, SeveralReportsFormAnArray) {
  std::vector<ObligationReport> rs = {checked("cantor.tla", RunMode::CheckOnly), checked("take_on_conj.tla")};
  auto j = nlohmann::json::parse(write_reports(rs, ReportFormat::Json));
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j.size(), 2u);
  EXPECT_TRUE(nlohmann::json::parse(write_reports({rs[0]}, ReportFormat::Json)).is_object());
}

TEST(Report, ParseRejectsBadDocuments) {
  EXPECT_THROW(parse_report("not json"), std::invalid_argument);
  EXPECT_THROW(parse_report("{}"), std::invalid_argument);
  EXPECT_THROW(parse_report(R"({"theorem":"t","status":"SORT OF","leaves":[],"errors":[]})"), std::invalid_argument);
}

TEST(Report, OmittedLeafMakesRunIncomplete) {
  ObligationReport r = checked("cantor_omitted.tla");
  EXPECT_EQ(r.status, RunStatus::Incomplete);
  int omitted = 0;
  for (const auto& l : r.leaves)
    if (l.omitted) {
      ++omitted;
      EXPECT_EQ(l.outcome.status, "omitted");
      EXPECT_EQ(l.path, "<1>1.<2>2.<3>1");
    }
  EXPECT_EQ(omitted, 1);
}

TEST(Report, MeaninglessRunCarriesStepPath) {
  ObligationReport r = checked("take_on_conj.tla");
  EXPECT_EQ(r.status, RunStatus::Meaningless);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].path, "<1>1");
  EXPECT_EQ(r.errors[0].line, 3);
  for (const auto& l : r.leaves) EXPECT_EQ(l.outcome.status, "skipped");
}

TEST(Report, ParseErrorIsMeaningless) {
  RunConfig c;
  ObligationReport r = check_source("THEOREM p\n<1>1. p OBVIOUS\n", "broken", c);
  EXPECT_EQ(r.status, RunStatus::Meaningless);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_GT(r.errors[0].line, 0);
}

TEST(Report, CheckOnlySkipsProving) {
  ObligationReport r = checked("cantor.tla", RunMode::CheckOnly);
  EXPECT_EQ(r.status, RunStatus::Incomplete);
  for (const auto& l : r.leaves) EXPECT_EQ(l.outcome.status, "skipped");
}

TEST(Report, TextReportListsUnprovedLeavesWithObligation) {
  std::string text = write_report(checked("cantor_omitted.tla"), ReportFormat::Text);
  EXPECT_NE(text.find("INCOMPLETE"), std::string::npos);
  EXPECT_NE(text.find("omitted"), std::string::npos);
  EXPECT_NE(text.find("|-"), std::string::npos);
}

TEST(Views, FilteredLeafIsExpandedUnlessAsked) {
  CheckResult c = check_theorem(parse_theorem(sample("cantor.tla")));
  LeafRecord first = leaf_obligations(c.derivation).front();
  LeafReport expanded = describe_leaf(1, first);
  EXPECT_EQ(expanded.filtered.find("T =="), std::string::npos);
  EXPECT_NE(expanded.filtered.find("{z \\in S : z \\notin f[z]}"), std::string::npos) << expanded.filtered;
  LeafReport raw = describe_leaf(1, first, LeafViewOptions{false});
  EXPECT_NE(raw.filtered.find("T =="), std::string::npos) << raw.filtered;
  EXPECT_EQ(raw.path, "<1>1.<2>2.<3>1.<4>1");
  EXPECT_EQ(raw.kind, "obvious-goal");
}

TEST(Embeddings, OneLinePerObligation) {
  EXPECT_EQ(write_embeddings({}), "");
  CheckResult c = check_theorem(parse_theorem(sample("cantor.tla")));
  std::vector<Obligation> views;
  for (const auto& l : leaf_obligations(c.derivation)) views.push_back(filtered_view(l.obligation));
  std::string doc = write_embeddings(views);
  EXPECT_EQ(std::count(doc.begin(), doc.end(), '\n'), oracle::kCantorLeaves);
  EXPECT_EQ(doc.substr(0, doc.find('\n')), embed(oracle::cantor_case_leaf_filtered()));
}
