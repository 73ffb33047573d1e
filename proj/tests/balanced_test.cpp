#include "support/instances.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hap;

TEST(Balanced, UsarThreeModes) {
  auto u = fixtures::usar_balanced();
  BalanceWeights w;
  w.ie_map = IeMap::exponential;
  BalanceOptions bo;
  bo.default_message_cost = u.message_cost;

  auto ob = balanced_plan(u.robot, u.mental, w, BalanceMode::optimal_balanced, bo);
  EXPECT_EQ(ob.task_fragment, u.rubble_route);
  EXPECT_TRUE(ob.explanation.edits.empty());
  EXPECT_NEAR(ob.objective, 11 + std::expm1(3.0), 1e-9);

  auto pe = balanced_plan(u.robot, u.mental, w, BalanceMode::perfectly_explicable, bo);
  EXPECT_EQ(pe.task_fragment, u.rubble_route);
  EXPECT_EQ(pe.explanation.edits, std::vector<Edit>{u.blocked_for_human});
  EXPECT_NEAR(pe.objective, 61, 1e-9);

  auto peo = balanced_plan(u.robot, u.mental, w, BalanceMode::perfectly_explicable_optimal, bo);
  EXPECT_EQ(peo.task_fragment, u.alternate_route);
  auto expected = std::vector<Edit>{u.blocked_for_human, u.open_for_human};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(peo.explanation.edits, expected);
  EXPECT_EQ(peo.comm_cost, 2 * u.message_cost);
  EXPECT_EQ(peo.plan_cost, *oracle::optimum(u.robot));
}

TEST(Balanced, OptimalityDeltaOfUsar) {
  auto u = fixtures::usar_balanced();
  auto d = optimality_delta(u.robot);
  EXPECT_TRUE(d.exact);
  EXPECT_TRUE(d.value == Cost(1));
  EXPECT_EQ(*oracle::optimum(u.robot), Rational(10));
  EXPECT_EQ(*oracle::optimum(u.mental), Rational(8));
}

TEST(Balanced, OptimalityDeltaMatchesEnumeration) {
  oracle::Rng rng(81);
  size_t checked = 0;
  while (checked < 150) {
    auto m = oracle::random_model(rng);
    auto opt = *oracle::optimum(m);
    Rational bound = opt + 6;
    std::set<Rational> costs;
    for (const auto& p : oracle::all_plans(m, bound)) costs.insert(*oracle::cost_of(m, p));
    auto d = optimality_delta(m);
    ASSERT_TRUE(d.exact);
    if (costs.size() >= 2) {
      EXPECT_TRUE(d.value == Cost(*std::next(costs.begin()) - *costs.begin()));
    } else {
      EXPECT_TRUE(d.value.is_inf() || d.value.value() > 6);
    }
    ++checked;
  }
}

// With messages scaled below the optimality delta, the plan is robot-optimal and the explanation is the
// cheapest one that makes some robot-optimal plan optimal for the human.
TEST(Balanced, PerfectlyExplicableOptimalMatchesBruteForce) {
  oracle::Rng rng(82);
  size_t cases = 0;
  while (cases < 60) {
    auto in = oracle::random_model_pair(rng, 5);
    if (!in) continue;
    auto sol = balanced_plan(in->robot, in->mental, {}, BalanceMode::perfectly_explicable_optimal);
    auto opt = *oracle::optimum(in->robot);
    ASSERT_TRUE(oracle::optimal_in(in->robot, sol.task_fragment)) << "case " << cases;
    size_t best = in->delta.size() + 1;
    for (const auto& p : oracle::all_plans(in->robot, opt))
      best = std::min(best, oracle::ExplanationOracle(in->robot, in->mental, p).mce_size());
    EXPECT_EQ(sol.explanation.size(), best) << "case " << cases;
    EXPECT_TRUE(oracle::optimal_in(oracle::edited(in->mental, sol.explanation.edits), sol.task_fragment));
    ++cases;
  }
}

TEST(Balanced, OptimalBalancedMatchesBruteForce) {
  oracle::Rng rng(83);
  size_t cases = 0;
  while (cases < 60) {
    auto in = oracle::random_model_pair(rng, 4);
    if (!in) continue;
    BalanceWeights w;
    w.alpha = 1 + static_cast<long long>(oracle::pick(rng, 2));
    w.beta = Rational(1 + static_cast<long long>(oracle::pick(rng, 4)), 2);
    w.gamma = 1 + static_cast<long long>(oracle::pick(rng, 3));
    w.ie_map = oracle::coin(rng) ? IeMap::linear : IeMap::exponential;
    auto sol = balanced_plan(in->robot, in->mental, w, BalanceMode::optimal_balanced);
    Rational bound = *oracle::optimum(in->robot) + 3;
    double best = 1e18;
    for (const auto& p : oracle::all_plans(in->robot, bound)) {
      auto cr = *oracle::cost_of(in->robot, p);
      for (size_t mask = 0; mask < (size_t{1} << in->delta.size()); ++mask) {
        auto es = oracle::subset(in->delta, mask);
        auto mh = oracle::edited(in->mental, es);
        auto ch = oracle::cost_of(mh, p);
        if (!ch) continue;
        double obj = to_double(w.alpha * cr) + to_double(w.beta) * static_cast<double>(es.size()) +
                     to_double(w.gamma) * w.penalty(*ch - *oracle::optimum(mh));
        best = std::min(best, obj);
      }
    }
    if (sol.plan_cost <= bound)
      EXPECT_NEAR(sol.objective, best, 1e-9) << "case " << cases;
    else
      EXPECT_LE(sol.objective, best + 1e-9);
    ++cases;
  }
}

TEST(Balanced, VocabularyMismatch) {
  auto u = fixtures::usar_balanced();
  auto m = u.mental;
  m.fluents.insert("extra");
  EXPECT_THROW(compile_augmented(u.robot, m), VocabularyMismatch);
  BalanceWeights w;
  w.alpha = w.beta = w.gamma = 0;
  EXPECT_THROW(w.check(), std::invalid_argument);
  EXPECT_THROW(balance_mode_from_string("nope"), std::invalid_argument);
}

TEST(Balanced, AugmentedModelReplaysSolution) {
  auto u = fixtures::usar_balanced();
  BalanceOptions bo;
  bo.default_message_cost = u.message_cost;
  auto sol = balanced_plan(u.robot, u.mental, {}, BalanceMode::perfectly_explicable, bo);
  auto am = compile_augmented(u.robot, u.mental, {}, false, u.message_cost);
  am.check();
  TaskState s = am.init;
  for (const auto& n : sol.augmented_plan) {
    const auto& a = am.action(n);
    ASSERT_TRUE(am.applicable(s, a)) << n;
    s = am.apply(s, a);
  }
  EXPECT_TRUE(s.count(kAugGoal));
  EXPECT_EQ(extract_fragments(am, sol.augmented_plan).first, sol.task_fragment);
}

TEST(Balanced, LegibilityAndPredictabilityTradeoffs) {
  auto p = fixtures::column_goals(0);
  BalanceWeights w;
  w.gamma = 100;
  auto lb = balanced_legibility(p.robot, p.goals, 0, 3, w, 50, 0);
  EXPECT_FALSE(lb.announce);
  EXPECT_EQ(lb.probability, Rational(1));
  lb = balanced_legibility(p.robot, p.goals, 0, 0, w, 1, 0);
  EXPECT_TRUE(lb.announce);
  auto f = fixtures::fetch();
  w.gamma = 10;
  auto pb = balanced_predictability(f.robot, 1, w, 1);
  EXPECT_EQ(oracle::cost_of(f.robot, pb.plan), oracle::optimum(f.robot));
  EXPECT_GE(pb.completions, 1u);
}
