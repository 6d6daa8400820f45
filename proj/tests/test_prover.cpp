#include <gtest/gtest.h>

#include <filesystem>

#include "generators.hpp"
#include "oracles.hpp"
#include "stepwise/engine.hpp"
#include "stepwise/prover.hpp"
#include "stepwise/surface.hpp"

using namespace stepwise;

namespace {

ExprPtr ex(const char* s) { return parse_expression(s); }

Sequent seq(std::vector<std::string> sig, std::vector<const char*> hyps, const char* goal) {
  Sequent s;
  s.signature = std::move(sig);
  for (const char* h : hyps) s.hypotheses.push_back(ex(h));
  s.goal = ex(goal);
  return s;
}

std::vector<LeafRecord> sample_leaves(const std::string& file) {
  CheckResult r = check_theorem(parse_theorem(oracle::read_file(file)));
  EXPECT_TRUE(r.meaningful()) << file;
  return leaf_obligations(r.derivation);
}

std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(std::string(SAMPLES_DIR) + "/corpus"))
    if (e.path().extension() == ".tla") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Prover, ExcludedMiddleAtDepthTwo) {
  Sequent s = seq({"P"}, {}, "P \\/ ~P");
  ProverOutcome o = prove(s);
  ASSERT_EQ(o.status, ProverOutcome::Status::Proved);
  EXPECT_EQ(o.depth, 2);
  EXPECT_TRUE(check_trace(s, o.trace));
}

TEST(Prover, NothingIsInTheEmptySet) {
  ProverOutcome o = prove(seq({}, {}, "\\E x : x \\in {}"), Budget{4, 2000, 2});
  EXPECT_EQ(o.status, ProverOutcome::Status::Unknown);
  EXPECT_FALSE(o.reason.empty());
}

TEST(Prover, EqualityUnderFunctionApplication) {
  Sequent s = seq({"a", "b", "f"}, {"a = b"}, "f[a] = f[b]");
  ProverOutcome o = prove(s);
  ASSERT_EQ(o.status, ProverOutcome::Status::Proved);
  EXPECT_TRUE(check_trace(s, o.trace));
}

TEST(Prover, QuantifierInstantiation) {
  Sequent s = seq({"S", "a", "P"}, {"\\A x \\in S : P(x)", "a \\in S"}, "P(a)");
  ProverOutcome o = prove(s);
  ASSERT_EQ(o.status, ProverOutcome::Status::Proved);
  EXPECT_TRUE(check_trace(s, o.trace));
}

TEST(Prover, SetComprehensionAndPowerset) {
  for (auto s : {seq({"S", "T"}, {"S \\subseteq T"}, "S \\in SUBSET T"),
                 seq({"S", "x"}, {"x \\in S", "x = x"}, "x \\in {y \\in S : y = y}"),
                 seq({"S", "f", "x"}, {"x \\in S"}, "f[x] \\in {f[y] : y \\in S}")}) {
    ProverOutcome o = prove(s);
    ASSERT_EQ(o.status, ProverOutcome::Status::Proved) << to_string(s);
    EXPECT_TRUE(check_trace(s, o.trace)) << replay_trace(s, o.trace).diagnostic;
  }
}

TEST(Prover, InvalidFormulaIsNotProved) {
  EXPECT_EQ(prove(seq({"p", "q"}, {"p \\/ q"}, "p")).status, ProverOutcome::Status::Unknown);
  EXPECT_EQ(prove(seq({"S", "T"}, {}, "S \\subseteq T")).status, ProverOutcome::Status::Unknown);
}

TEST(Prover, MalformedSequentsAreReported) {
  Obligation label_left;
  label_left.context = {Assumption::declare("p")};
  label_left.goal = ex("p");
  label_left.context.push_back(Assumption::assume(ex("<1>1")));
  EXPECT_EQ(prove(label_left).status, ProverOutcome::Status::Malformed);

  Obligation undeclared;
  undeclared.goal = ex("zz = zz");
  EXPECT_THROW(make_sequent(undeclared), MalformedSequent);
}

TEST(Prover, MakeSequentDropsHiddenAndExpands) {
  Obligation o;
  o.context = {Assumption::declare("S"), Assumption::define("D", Definable::lambda({"a"}, ex("a \\in S"))),
               Assumption::assume(ex("FALSE"), true), Assumption::declare("x"), Assumption::assume(ex("D(x)"))};
  o.goal = ex("D(x)");
  Sequent s = make_sequent(o);
  EXPECT_EQ(to_string(s), "NEW S, NEW x, x \\in S |- x \\in S");
}

TEST(Cantor, EveryLeafIsProvedAndReplays) {
  auto leaves = sample_leaves(std::string(SAMPLES_DIR) + "/cantor.tla");
  ASSERT_EQ(leaves.size(), static_cast<std::size_t>(oracle::kCantorLeaves));
  for (const auto& l : leaves) {
    Sequent s = make_sequent(l.obligation);
    ProverOutcome o = prove(s);
    ASSERT_EQ(o.status, ProverOutcome::Status::Proved) << l.origin.path_text() << "\n" << to_string(s);
    TraceVerdict v = replay_trace(s, o.trace);
    EXPECT_TRUE(v.ok) << l.origin.path_text() << ": " << v.diagnostic;
  }
}

class TraceMutation : public ::testing::Test {
 protected:
  void SetUp() override {
    auto leaves = sample_leaves(std::string(SAMPLES_DIR) + "/cantor.tla");
    // The first leaf whose proof instantiates a universal.
    for (const auto& l : leaves) {
      s = make_sequent(l.obligation);
      ProverOutcome o = prove(s);
      ASSERT_EQ(o.status, ProverOutcome::Status::Proved);
      trace = o.trace;
      for (const auto& line : trace.lines)
        if (line.kind == TraceLine::Kind::Expand && line.rule == "gamma") goto found;
    }
    FAIL() << "no Cantor leaf needs a gamma step";
  found:
    ASSERT_TRUE(check_trace(s, trace));
  }
  Sequent s;
  Trace trace;
};

TEST_F(TraceMutation, TextRoundTrip) {
  Trace again = Trace::parse(trace.to_text());
  EXPECT_EQ(again.to_text(), trace.to_text());
  EXPECT_TRUE(check_trace(s, again));
}

TEST_F(TraceMutation, DroppingACloseLineIsRejected) {
  for (std::size_t i = 0; i < trace.lines.size(); ++i) {
    if (trace.lines[i].kind != TraceLine::Kind::Close) continue;
    Trace t = trace;
    t.lines.erase(t.lines.begin() + static_cast<long>(i));
    EXPECT_FALSE(check_trace(s, t)) << "close line " << i;
  }
}

TEST_F(TraceMutation, DroppingAnInitLineIsRejected) {
  Trace t = trace;
  t.lines.erase(t.lines.begin());
  EXPECT_FALSE(check_trace(s, t));
}

TEST_F(TraceMutation, AlteredInstanceIsRejected) {
  int altered = 0;
  for (std::size_t i = 0; i < trace.lines.size(); ++i) {
    const auto& line = trace.lines[i];
    if (line.kind != TraceLine::Kind::Expand || line.rule != "gamma") continue;
    Trace t = trace;
    t.lines[i].term = ex("zz_unknown");
    EXPECT_FALSE(check_trace(s, t)) << "gamma line " << i;
    ++altered;
  }
  EXPECT_GT(altered, 0);
}

TEST_F(TraceMutation, ProofAgainstAnotherGoalIsRejected) {
  Sequent other = s;
  other.goal = ex("FALSE");
  EXPECT_FALSE(check_trace(other, trace));
}

TEST(TraceText, MalformedTextThrows) {
  EXPECT_THROW(Trace::parse("expand\tand\tnot-a-number"), std::invalid_argument);
  EXPECT_THROW(Trace::parse("bogus\t1"), std::invalid_argument);
}

TEST(Properties, AgreesWithTruthTableOnPropositionalSequents) {
  gen::Rng r(41);
  int valid = 0, invalid = 0;
  for (int i = 0; i < 500; ++i) {
    int atoms = 1 + r.below(4);
    std::vector<std::string> names = gen::atom_names(atoms);
    Sequent s;
    s.signature = names;
    int hyps = r.below(3);
    for (int k = 0; k < hyps; ++k) s.hypotheses.push_back(gen::propositional(r, atoms, 2));
    s.goal = gen::propositional(r, atoms, 3);
    bool truth = oracle::valid(s.hypotheses, s.goal, names);
    ProverOutcome o = prove(s, Budget{12, 5000, 4});
    EXPECT_EQ(o.status == ProverOutcome::Status::Proved, truth) << to_string(s);
    if (o.status == ProverOutcome::Status::Proved) EXPECT_TRUE(check_trace(s, o.trace)) << to_string(s);
    (truth ? valid : invalid)++;
  }
  EXPECT_GT(valid, 50);
  EXPECT_GT(invalid, 50);
}

TEST(Properties, BudgetMonotonicityOnCorpus) {
  const std::vector<Budget> ladder = {{0, 5000, 1}, {1, 5000, 1}, {2, 5000, 2}, {4, 5000, 3}, {12, 5000, 4}};
  for (const auto& file : corpus_files()) {
    for (const auto& l : sample_leaves(file)) {
      Sequent s = make_sequent(l.obligation);
      bool before = false;
      for (const auto& b : ladder) {
        bool now = prove(s, b).status == ProverOutcome::Status::Proved;
        EXPECT_FALSE(before && !now) << file << " " << l.origin.path_text() << " depth " << b.max_depth;
        before = now;
      }
      EXPECT_TRUE(before) << file << " " << l.origin.path_text();
    }
  }
}

TEST(Properties, SearchIsDeterministic) {
  for (const auto& file : corpus_files()) {
    for (const auto& l : sample_leaves(file)) {
      Sequent s = make_sequent(l.obligation);
      ProverOutcome a = prove(s), b = prove(s);
      EXPECT_EQ(a.status, b.status);
      EXPECT_EQ(a.trace.to_text(), b.trace.to_text()) << file;
    }
  }
}
