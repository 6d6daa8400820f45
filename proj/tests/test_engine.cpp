#include <gtest/gtest.h>

#include <functional>

#include "generators.hpp"
#include "oracles.hpp"
#include "stepwise/engine.hpp"
#include "stepwise/surface.hpp"

using namespace stepwise;

namespace {

CheckResult check_text(const std::string& src, EngineOptions opts = {}) {
  return check_theorem(parse_theorem(src), opts);
}

std::vector<LeafRecord> leaves_of(const std::string& src, EngineOptions opts = {}) {
  CheckResult r = check_text(src, opts);
  EXPECT_TRUE(r.meaningful()) << (r.errors.empty() ? "" : r.errors.front().message);
  return leaf_obligations(r.derivation);
}

CheckResult cantor() {
  return check_theorem(parse_theorem(oracle::read_file(std::string(SAMPLES_DIR) + "/cantor.tla")));
}

bool has_hidden_fact(const Obligation& o, const ExprPtr& f) {
  for (const auto& a : o.context)
    if (a.kind == Assumption::Kind::Fact && a.hidden && is_plain(*a.fact) && alpha_equal(a.fact->goal, f))
      return true;
  return false;
}

void visit(const Derivation& d, const std::function<void(const Derivation&)>& f) {
  f(d);
  for (const auto& c : d.children) visit(c, f);
}

}  // namespace

TEST(Cantor, LeafCountMatchesHandTrace) {
  CheckResult r = cantor();
  ASSERT_TRUE(r.meaningful());
  EXPECT_EQ(leaf_obligations(r.derivation).size(), static_cast<std::size_t>(oracle::kCantorLeaves));
}

TEST(Cantor, LeafOrderPathsAndKinds) {
  auto leaves = leaf_obligations(cantor().derivation);
  std::vector<std::pair<std::string, std::string>> got;
  for (const auto& l : leaves) got.emplace_back(l.origin.path_text(), to_string(l.kind));
  std::vector<std::pair<std::string, std::string>> want = {
      {"<1>1.<2>2.<3>1.<4>1", "obvious-goal"}, {"<1>1.<2>2.<3>1.<4>2", "obvious-goal"},
      {"<1>1.<2>2.<3>1.<4>3", "use-fact-side"}, {"<1>1.<2>2.<3>1.<4>3", "use-fact-side"},
      {"<1>1.<2>2.<3>1.<4>3", "by-goal"},       {"<1>1.<2>2.<3>2", "use-fact-side"},
      {"<1>1.<2>2.<3>2", "by-goal"},            {"<1>1.<2>3", "use-fact-side"},
      {"<1>1.<2>3", "by-goal"},                 {"<1>2", "use-fact-side"},
      {"<1>2", "by-goal"}};
  EXPECT_EQ(got, want);
}

TEST(Cantor, CaseLeafMatchesRuleByRuleConstruction) {
  auto leaves = leaf_obligations(cantor().derivation);
  const Obligation& leaf = leaves.front().obligation;
  Obligation want = oracle::cantor_case_leaf();
  EXPECT_TRUE(alpha_equal(leaf, want)) << to_pretty_string(leaf) << "\nexpected\n" << to_pretty_string(want);
}

TEST(Cantor, CaseLeafFilteredAndExpanded) {
  auto leaves = leaf_obligations(cantor().derivation);
  Obligation view = expand_usable_definitions(filter(leaves.front().obligation));
  EXPECT_TRUE(alpha_equal(view, oracle::cantor_case_leaf_filtered()));
  EXPECT_EQ(to_string(view),
            "NEW S, NEW f, f \\in [S -> SUBSET S], NEW x, x \\in S, x \\in {z \\in S : z \\notin f[z]} "
            "|- f[x] # {z \\in S : z \\notin f[z]}");
}

TEST(Cantor, EveryLeafIsClosed) {
  for (const auto& l : leaf_obligations(cantor().derivation))
    EXPECT_TRUE(is_well_formed(l.obligation)) << l.origin.path_text();
}

TEST(Root, FreeIdentifiersAreDeclaredInSortedOrder) {
  Obligation o = root_obligation(parse_theorem("THEOREM q => p"));
  EXPECT_EQ(to_string(o), "NEW p, NEW q |- q => p");
}

TEST(Root, AssumeProveBecomesContext) {
  Obligation o = root_obligation(parse_theorem("THEOREM ASSUME NEW S, NEW x \\in S PROVE x \\in S"));
  EXPECT_EQ(to_string(o), "NEW S, NEW x, x \\in S |- x \\in S");
}

TEST(Rules, ObviousGivesOneLeaf) {
  auto leaves = leaves_of("THEOREM ASSUME NEW p PROVE p => p\nOBVIOUS");
  ASSERT_EQ(leaves.size(), 1u);
  EXPECT_EQ(leaves[0].kind, LeafKind::ObviousGoal);
  EXPECT_EQ(to_string(leaves[0].obligation), "NEW p |- p => p");
}

TEST(Rules, ByFactsEmitSideLeavesFirst) {
  auto leaves = leaves_of("THEOREM ASSUME NEW p, NEW q, p, q PROVE p /\\ q\nBY p, q");
  ASSERT_EQ(leaves.size(), 3u);
  EXPECT_EQ(leaves[0].kind, LeafKind::UseFactSide);
  EXPECT_EQ(to_string(leaves[0].obligation.goal), "p");
  EXPECT_EQ(to_string(leaves[1].obligation.goal), "q");
  EXPECT_EQ(leaves[2].kind, LeafKind::ByGoal);
}

TEST(Rules, OmittedLeafIsFlagged) {
  auto leaves = leaves_of("THEOREM ASSUME NEW p PROVE p\nOMITTED");
  ASSERT_EQ(leaves.size(), 1u);
  EXPECT_TRUE(leaves[0].omitted);
}

TEST(Rules, MissingProofWarns) {
  CheckResult r = check_text("THEOREM ASSUME NEW p PROVE p");
  EXPECT_TRUE(r.meaningful());
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_TRUE(leaf_obligations(r.derivation).front().omitted);
}

TEST(Rules, AssertionHidesNegatedGoalInSubproof) {
  auto leaves = leaves_of("THEOREM ASSUME NEW p, NEW q PROVE q\n<1>1. p OBVIOUS\n<1>2. QED OMITTED");
  ASSERT_EQ(leaves.size(), 2u);
  const Obligation& sub = leaves[0].obligation;
  EXPECT_TRUE(has_hidden_fact(sub, parse_expression("~q")));
  EXPECT_EQ(to_string(sub.goal), "p");
  const Obligation& after = leaves[1].obligation;
  EXPECT_EQ(after.context.back().kind, Assumption::Kind::Fact);
  EXPECT_TRUE(after.context.back().hidden);
  EXPECT_EQ(to_string(after.context.back().fact->goal), "<1>1");
}

TEST(Rules, UnlabeledAssertionAddsUsableFact) {
  auto leaves = leaves_of("THEOREM ASSUME NEW p, NEW q PROVE q\n<1>. p OBVIOUS\n<1>. QED OMITTED");
  const Obligation& after = leaves[1].obligation;
  EXPECT_FALSE(after.context.back().hidden);
  EXPECT_EQ(to_string(after.context.back()), "p");
  EXPECT_EQ(leaves[0].origin.path_text(), "<1>(1)");
}

TEST(Rules, SufficesSwapsGoal) {
  auto leaves = leaves_of("THEOREM ASSUME NEW p, NEW q PROVE p => q\n<1>1. SUFFICES q OBVIOUS\n<1>2. QED OMITTED");
  ASSERT_EQ(leaves.size(), 2u);
  EXPECT_EQ(to_string(leaves[0].obligation.goal), "p => q");
  EXPECT_EQ(to_string(leaves[1].obligation.goal), "q");
  EXPECT_TRUE(has_hidden_fact(leaves[1].obligation, parse_expression("~(p => q)")));
}

TEST(Rules, TakeBoundedAddsSubsetSide) {
  auto leaves = leaves_of("THEOREM ASSUME NEW S PROVE \\A x \\in S : x \\in S\n<1>1. TAKE y \\in S\n<1>2. QED OBVIOUS");
  ASSERT_EQ(leaves.size(), 2u);
  EXPECT_EQ(leaves[0].kind, LeafKind::TakeSubsetSide);
  EXPECT_EQ(to_string(leaves[0].obligation.goal), "S \\subseteq S");
  EXPECT_EQ(to_string(leaves[1].obligation), "NEW S, NEW y, y \\in S |- y \\in S");
}

TEST(Rules, WitnessBoundedAddsTwoSides) {
  auto leaves = leaves_of("THEOREM ASSUME NEW S, NEW a, a \\in S PROVE \\E x \\in S : x = a\n"
                          "<1>1. WITNESS a \\in S\n<1>2. QED OBVIOUS");
  ASSERT_EQ(leaves.size(), 3u);
  EXPECT_EQ(leaves[0].kind, LeafKind::WitnessSubsetSide);
  EXPECT_EQ(leaves[1].kind, LeafKind::WitnessMembershipSide);
  EXPECT_EQ(to_string(leaves[1].obligation.goal), "a \\in S");
  EXPECT_EQ(to_string(leaves[2].obligation.goal), "a = a");
}

TEST(Rules, HaveSplitsImplication) {
  auto leaves = leaves_of("THEOREM ASSUME NEW a, NEW b PROVE a /\\ b => b\n<1>1. HAVE b\n<1>2. QED OBVIOUS");
  ASSERT_EQ(leaves.size(), 2u);
  EXPECT_EQ(leaves[0].kind, LeafKind::HaveSide);
  EXPECT_EQ(to_string(leaves[0].obligation), "NEW a, NEW b, a /\\ b |- b");
  EXPECT_EQ(to_string(leaves[1].obligation), "NEW a, NEW b, b |- b");
}

TEST(Rules, PickProducesExistenceLeaf) {
  auto leaves = leaves_of("THEOREM ASSUME NEW S, NEW P PROVE TRUE\n<1>1. PICK c \\in S : P(c) OMITTED\n<1>2. QED OBVIOUS");
  ASSERT_EQ(leaves.size(), 2u);
  EXPECT_EQ(to_string(leaves[0].obligation.goal), "\\E c \\in S : P(c)");
  EXPECT_EQ(to_string(leaves[1].obligation), "NEW S, NEW P, NEW c, c \\in S, P(c) |- TRUE");
}

TEST(Rules, CaseIsAnAssertionOfTheGoalUnderTheCase) {
  auto leaves = leaves_of("THEOREM ASSUME NEW p, NEW q PROVE q\n<1>1. CASE p OMITTED\n<1>2. QED OMITTED");
  EXPECT_EQ(to_string(leaves[0].obligation.goal), "q");
  EXPECT_EQ(to_string(leaves[0].obligation.context.back()), "p");
}

TEST(Rules, HideThenUseRestoresFact) {
  auto leaves = leaves_of("THEOREM ASSUME NEW p, p PROVE p\n<1>1. HIDE p\n<1>2. QED OMITTED");
  EXPECT_TRUE(leaves[0].obligation.context.back().hidden);
  auto used = leaves_of("THEOREM ASSUME NEW p, p PROVE p\n<1>1. HIDE p\n<1>2. USE p\n<1>3. QED OMITTED");
  ASSERT_EQ(used.size(), 2u);
  EXPECT_EQ(used[0].kind, LeafKind::UseFactSide);
}

TEST(Rules, LocalDefinitionsUsableByDefaultAndHiddenOnRequest) {
  const char* src = "THEOREM ASSUME NEW p PROVE p\n<1>1. DEFINE D == p\n<1>2. QED OMITTED";
  auto usable = leaves_of(src);
  EXPECT_FALSE(usable[0].obligation.context.back().hidden);
  EngineOptions hidden;
  hidden.local_defs_usable = false;
  auto kept = leaves_of(src, hidden);
  EXPECT_TRUE(kept[0].obligation.context.back().hidden);
}

TEST(Meaningless, TakeOnConjunctionIsRejectedWithPath) {
  CheckResult r = check_text(oracle::read_file(std::string(SAMPLES_DIR) + "/take_on_conj.tla"));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].path, "<1>1");
  EXPECT_NE(r.errors[0].message.find("TAKE"), std::string::npos);
}

TEST(Meaningless, ThrowingVariantCarriesPath) {
  Theorem t = parse_theorem("THEOREM p /\\ q\n<1>1. TAKE x\n<1>2. QED OBVIOUS");
  try {
    check_claim(*t.proof, root_obligation(t));
    FAIL() << "expected MeaninglessError";
  } catch (const MeaninglessError& e) {
    EXPECT_EQ(e.path(), "<1>1");
  }
}

TEST(Meaningless, DuplicateDefinition) {
  Theorem t = parse_theorem("THEOREM ASSUME NEW p PROVE p\n<1>1. DEFINE p == TRUE\n<1>2. QED OBVIOUS");
  EXPECT_THROW(check_claim(*t.proof, root_obligation(t)), DuplicateName);
}

TEST(Meaningless, HidingAnAbsentFact) {
  Theorem t = parse_theorem("THEOREM ASSUME NEW p PROVE p\n<1>1. HIDE p\n<1>2. QED OBVIOUS");
  EXPECT_THROW(check_claim(*t.proof, root_obligation(t)), UnknownFact);
}

TEST(Meaningless, UnknownIdentifierInStep) {
  CheckResult r = check_text("THEOREM ASSUME NEW p PROVE p\n<1>1. zz OBVIOUS\n<1>2. QED OBVIOUS");
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_NE(r.errors[0].message.find("zz"), std::string::npos);
}

TEST(Meaningless, MixedBoundedTakeIsRejected) {
  CheckResult r = check_text("THEOREM ASSUME NEW S PROVE \\A x \\in S : \\A y : x = y\n<1>1. TAKE a, b\n<1>2. QED OMITTED");
  EXPECT_FALSE(r.meaningful());
}

TEST(Meaningless, ErrorsInSiblingsAreAllReported) {
  CheckResult r = check_text("THEOREM ASSUME NEW p PROVE p\n<1>1. TAKE x\n<1>2. HIDE zz\n<1>3. QED OBVIOUS");
  EXPECT_EQ(r.errors.size(), 2u);
}

TEST(Matching, UsableDefinitionIsUnfoldedToFindQuantifier) {
  auto leaves = leaves_of("THEOREM ASSUME NEW S PROVE TRUE\n"
                          "<1>1. DEFINE All == \\A x \\in S : x \\in S\n"
                          "<1>2. All\n"
                          "  <2>1. TAKE y \\in S\n"
                          "  <2>2. QED OBVIOUS\n"
                          "<1>3. QED OBVIOUS");
  ASSERT_GE(leaves.size(), 2u);
  EXPECT_EQ(to_string(leaves[1].obligation.goal), "y \\in S");
}

TEST(Properties, FuzzedStepsNeverCrash) {
  gen::Rng r(5);
  int meaningless = 0;
  for (int i = 0; i < 500; ++i) {
    std::string src = gen::claim_source(r);
    Theorem t = parse_theorem(src);
    CheckResult res;
    ASSERT_NO_THROW(res = check_theorem(t)) << src;
    if (!res.meaningful()) ++meaningless;
    for (const auto& e : res.errors) EXPECT_FALSE(e.message.empty());
  }
  EXPECT_GT(meaningless, 0);
}

TEST(Properties, CheckingIsDeterministic) {
  gen::Rng r(17);
  for (int i = 0; i < 300; ++i) {
    std::string src = gen::claim_source(r);
    Theorem t = parse_theorem(src);
    EXPECT_EQ(to_string(check_theorem(t).derivation), to_string(check_theorem(t).derivation)) << src;
  }
}

TEST(Properties, LeavesOfMeaningfulClaimsAreClosed) {
  gen::Rng r(23);
  int meaningful = 0;
  for (int i = 0; i < 500; ++i) {
    std::string src = gen::claim_source(r);
    CheckResult res = check_theorem(parse_theorem(src));
    if (!res.meaningful()) continue;
    ++meaningful;
    for (const auto& l : leaf_obligations(res.derivation))
      EXPECT_TRUE(is_well_formed(l.obligation)) << src << "\n" << l.origin.path_text();
  }
  EXPECT_GT(meaningful, 50);
}

TEST(Properties, AssertionsAndSufficesCarryHiddenNegatedGoal) {
  gen::Rng r(29);
  int seen = 0;
  for (int i = 0; i < 500; ++i) {
    std::string src = gen::claim_source(r);
    CheckResult res = check_theorem(parse_theorem(src));
    visit(res.derivation, [&](const Derivation& d) {
      ExprPtr not_e = build::negate(d.input.goal);
      if (d.rule == "ASSERT1" || d.rule == "ASSERT2") {
        ++seen;
        ASSERT_FALSE(d.children.empty());
        EXPECT_TRUE(has_hidden_fact(d.children.front().input, not_e)) << src;
      } else if (d.rule == "SUFFICES1" || d.rule == "SUFFICES2") {
        ++seen;
        ASSERT_TRUE(d.output);
        EXPECT_TRUE(has_hidden_fact(*d.output, not_e)) << src;
      }
    });
  }
  EXPECT_GT(seen, 100);
}
