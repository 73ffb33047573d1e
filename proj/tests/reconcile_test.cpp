#include "support/instances.hpp"

#include <gtest/gtest.h>

using namespace hap;

TEST(Fetch, PatchAndMinimalExplanations) {
  auto f = fixtures::fetch();
  auto mrp = make_mrp(f.plan, f.robot, f.mental);
  auto c = mce(mrp);
  auto m = mme(mrp);
  EXPECT_EQ(c.keys(), (std::set<std::string>{"move_loc1_loc2-has-precondition-hand-tucked"}));
  EXPECT_EQ(m.keys(), (std::set<std::string>{"tuck-has-add-effect-crouched", "move_loc1_loc2-has-precondition-crouched"}));
  EXPECT_LE(c.size(), m.size());
  auto p = patch_explanations(mrp);
  EXPECT_EQ(p.ppe.keys(), p.mpe.keys());
  EXPECT_EQ(p.mpe.size(), 3u);
  EXPECT_TRUE(oracle::optimal_in(oracle::edited(f.mental, c.edits), f.plan));
  EXPECT_TRUE(oracle::optimal_in(oracle::edited(f.mental, m.edits), f.plan));
}

TEST(Fetch, SelectionHeuristicAgreesWithFullSearch) {
  auto f = fixtures::fetch();
  auto mrp = make_mrp(f.plan, f.robot, f.mental);
  EXPECT_EQ(mce(mrp, true).keys(), mce(mrp).keys());
}

TEST(Mrp, RejectsSuboptimalPlan) {
  auto f = fixtures::fetch();
  Plan longer = {"pick-up_b1_loc1", "crouch", "tuck", "move_loc1_loc2", "put-down_b1_loc2"};
  EXPECT_THROW(make_mrp(longer, f.robot, f.mental), InvalidPlan);
}

TEST(MinimalExplanations, MatchBruteForceOnRandomPairs) {
  oracle::Rng rng(51);
  size_t cases = 0, unique_mce = 0;
  while (cases < 200) {
    auto p = oracle::random_mrp_pair(rng, 8);
    if (!p) continue;
    oracle::ExplanationOracle o(p->mrp.robot, p->mrp.mental, p->mrp.plan);
    auto c = mce(p->mrp);
    auto m = mme(p->mrp);
    ASSERT_EQ(c.size(), o.mce_size()) << "case " << cases;
    EXPECT_TRUE(o.complete(c.edits));
    auto masks = oracle::minimal_masks(o, c.size());
    if (masks.size() == 1) {
      ++unique_mce;
      EXPECT_EQ(o.mask_of(c.edits), masks[0]);
    }
    ASSERT_EQ(m.size(), o.mme_size()) << "case " << cases;
    EXPECT_TRUE(o.complete(m.edits));
    EXPECT_TRUE(o.monotone(m.edits));
    EXPECT_LE(c.size(), m.size());
    ++cases;
  }
  EXPECT_GT(unique_mce, 0u);
}

TEST(ApproximateExplanation, CompleteFlagIsSound) {
  oracle::Rng rng(52);
  size_t cases = 0;
  while (cases < 100) {
    auto p = oracle::random_mrp_pair(rng, 6);
    if (!p) continue;
    oracle::ExplanationOracle o(p->mrp.robot, p->mrp.mental, p->mrp.plan);
    Explanation a;
    try {
      a = approx_mce(p->mrp);
    } catch (const NoExplanation&) {
      continue;
    }
    EXPECT_TRUE(oracle::cost_of(oracle::edited(p->mrp.mental, a.edits), p->mrp.plan).has_value());
    if (a.complete) {
      EXPECT_TRUE(o.complete(a.edits));
      EXPECT_GE(a.size(), o.mce_size());
    }
    ++cases;
  }
}

TEST(Contrastive, RefutesEveryFoilMinimally) {
  oracle::Rng rng(53);
  size_t cases = 0;
  while (cases < 100) {
    auto p = oracle::random_mrp_pair(rng, 6);
    if (!p) continue;
    if (!oracle::optimum(p->mrp.mental)) continue;
    auto foils = enumerate_optimal(p->mrp.mental, 3).plans;
    bool satisfiable = false;
    for (const auto& f : foils)
      if (auto c = oracle::cost_of(p->mrp.robot, f); c && *c < *oracle::cost_of(p->mrp.robot, p->mrp.plan))
        satisfiable = true;
    if (satisfiable) {
      EXPECT_THROW(contrastive_explain(p->mrp, foils), FoilSatisfiable);
      continue;
    }
    auto e = contrastive_explain(p->mrp, foils);
    auto refutes = [&](const std::vector<Edit>& es) {
      auto m = oracle::edited(p->mrp.mental, es);
      auto pc = oracle::cost_of(m, p->mrp.plan);
      if (!pc) return false;
      for (const auto& f : foils)
        if (auto fc = oracle::cost_of(m, f); fc && *fc < *pc) return false;
      return true;
    };
    EXPECT_TRUE(refutes(e.edits));
    const size_t n = p->delta.size();
    for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
      if (static_cast<size_t>(__builtin_popcountll(mask)) >= e.size()) continue;
      std::vector<Edit> es;
      for (size_t i = 0; i < n; ++i)
        if (mask >> i & 1u) es.push_back(p->delta[i]);
      EXPECT_FALSE(refutes(es));
    }
    ++cases;
  }
}

TEST(Contrastive, FoilSpecExpandsToCheapestMatches) {
  auto f = fixtures::fetch();
  auto mrp = make_mrp(f.plan, f.robot, f.mental);
  FoilSpec spec;
  spec.actions = {"move_loc1_loc2"};
  spec.before = {{"move_loc1_loc2", "put-down_b1_loc2"}};
  auto foils = expand_foil_spec(spec, f.mental, 6);
  ASSERT_FALSE(foils.empty());
  EXPECT_EQ(foils.front(), (Plan{"pick-up_b1_loc1", "move_loc1_loc2", "put-down_b1_loc2"}));
  auto e = contrastive_explain(mrp, spec);
  EXPECT_FALSE(e.edits.empty());
  EXPECT_THROW(contrastive_explain(mrp, std::vector<Plan>{}), std::invalid_argument);
}

TEST(Lies, MakePlanOptimalInTheEditedModel) {
  oracle::Rng rng(54);
  size_t cases = 0, found = 0;
  while (cases < 60) {
    auto p = oracle::random_mrp_pair(rng, 4);
    if (!p) continue;
    ++cases;
    for (auto mode : {LieMode::omission_only, LieMode::unconstrained}) {
      Explanation e;
      try {
        e = lie_explain(p->mrp, mode, 2);
      } catch (const NoLieFound&) {
        continue;
      }
      ++found;
      EXPECT_TRUE(oracle::optimal_in(oracle::edited(p->mrp.mental, e.edits), p->mrp.plan));
      if (mode == LieMode::omission_only) {
        for (const auto& x : e.edits) EXPECT_FALSE(x.add);
      }
    }
  }
  EXPECT_GT(found, 0u);
}

TEST(Lies, FetchOmissionLie) {
  auto f = fixtures::fetch();
  auto e = lie_explain(make_mrp(f.plan, f.robot, f.mental), LieMode::unconstrained, 2);
  EXPECT_EQ(e.size(), 1u);
}
