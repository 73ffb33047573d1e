#include "support/instances.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hap;

namespace {

constexpr size_t kCases = 500;

}  // namespace

TEST(Explicability, FetchPlanIsInexplicableBeforeReconciliation) {
  auto f = fixtures::fetch();
  auto r = explicability(f.plan, f.mental, DistanceSpec::cost_difference(), 50);
  EXPECT_TRUE(r.value.has_value());
  EXPECT_EQ(*r.value, Rational(-1));
  auto s = explicability(f.plan, f.mental, DistanceSpec::of(DistanceKind::action), 50, &f.robot);
  EXPECT_TRUE(s.value.has_value());
  EXPECT_LE(*s.value, Rational(0));
}

// The most explicable candidate is unchanged when distances pass through a strictly increasing map.
TEST(ScoreProperties, ArgmaxInvariantUnderMonotoneMaps) {
  oracle::Rng rng(31);
  size_t cases = 0;
  while (cases < kCases) {
    auto in = oracle::random_score_instance(rng);
    if (!in) continue;
    auto spec = DistanceSpec::of(oracle::coin(rng) ? DistanceKind::action : DistanceKind::state_sequence);
    auto expected = enumerate_optimal(in->mental, 20).plans;
    double a = 0.5 + oracle::pick(rng, 5), b = 0.1 * static_cast<double>(oracle::pick(rng, 10));
    auto warp = [&](double x) { return a * std::exp(x) + b * x * x * x; };
    std::vector<double> raw, warped;
    for (const auto& p : in->candidates) {
      auto r = explicability(p, in->mental, spec, 20, &in->robot);
      ASSERT_TRUE(r.value.has_value());
      double ie = -to_double(*r.value);
      double best = 1e18;
      for (const auto& e : expected)
        best = std::min(best, warp(plan_distance(in->robot, p, in->mental, e, spec).to_double()));
      raw.push_back(-ie);
      warped.push_back(-best);
    }
    auto argmax = [](const std::vector<double>& v) {
      std::set<size_t> out;
      double m = *std::max_element(v.begin(), v.end());
      for (size_t i = 0; i < v.size(); ++i)
        if (std::abs(v[i] - m) < 1e-9) out.insert(i);
      return out;
    };
    EXPECT_EQ(argmax(raw), argmax(warped));
    ++cases;
  }
}

// Extending a prefix can only remove completions, so predictability never decreases.
TEST(ScoreProperties, PredictabilityMonotoneInPrefix) {
  oracle::Rng rng(32);
  size_t cases = 0;
  while (cases < kCases) {
    auto m = oracle::random_model(rng);
    Rational bound = *oracle::optimum(m) + static_cast<long long>(oracle::pick(rng, 3));
    auto plans = enumerate_valid_bounded(m, bound, 10).plans;
    if (plans.empty()) continue;
    const Plan& p = plans[oracle::pick(rng, plans.size())];
    if (p.size() < 2) continue;
    size_t k = oracle::pick(rng, p.size());
    Plan pre(p.begin(), p.begin() + static_cast<long>(k)), ext(p.begin(), p.begin() + static_cast<long>(k + 1));
    ScoreReport a, b;
    try {
      a = predictability(pre, m, bound, 100000);
      b = predictability(ext, m, bound, 100000);
    } catch (const PrefixInexecutable&) {
      continue;
    }
    ASSERT_FALSE(a.truncated);
    EXPECT_GE(*b.value, *a.value);
    EXPECT_LE(b.completions, a.completions);
    for (const auto& w : b.witnesses) EXPECT_TRUE(std::find(a.witnesses.begin(), a.witnesses.end(), w) != a.witnesses.end());
    ++cases;
  }
}

TEST(ScoreProperties, LegibilityInUnitInterval) {
  oracle::Rng rng(33);
  size_t cases = 0;
  while (cases < kCases) {
    auto robot = oracle::random_model(rng);
    ModelHypothesisSet hyp;
    hyp.models.push_back(robot);
    size_t extra = 1 + oracle::pick(rng, 4);
    for (size_t i = 0; i < extra; ++i) hyp.models.push_back(oracle::perturb(rng, robot, 1 + oracle::pick(rng, 3), false));
    bool weighted = oracle::coin(rng);
    if (weighted) {
      long long total = 0;
      std::vector<long long> w;
      for (size_t i = 0; i < hyp.models.size(); ++i) {
        w.push_back(1 + static_cast<long long>(oracle::pick(rng, 5)));
        total += w.back();
      }
      for (auto x : w) hyp.weights.push_back(Rational(x, total));
    }
    Plan p = optimal_plan(robot).plan;
    auto r = legibility(p, hyp);
    ASSERT_TRUE(r.value.has_value());
    EXPECT_GT(*r.value, Rational(0));
    EXPECT_LE(*r.value, Rational(1));
    size_t consistent = 0;
    for (const auto& m : hyp.models) consistent += oracle::cost_of(m, p).has_value();
    EXPECT_EQ(r.consistent_models.size(), consistent);
    if (!weighted) EXPECT_EQ(*r.value, Rational(1, static_cast<long long>(consistent)));
    ++cases;
  }
}

TEST(Legibility, NoConsistentModelThrows) {
  auto f = fixtures::fetch();
  ModelHypothesisSet hyp;
  hyp.models = {f.robot};
  EXPECT_THROW(legibility({"move_loc1_loc2"}, hyp), NoConsistentModel);
  hyp.weights = {Rational(1, 2)};
  EXPECT_THROW(hyp.check(), std::invalid_argument);
}

TEST(Predictability, NextActionKeepsGoalReachable) {
  auto f = fixtures::fetch();
  auto a = predictable_next_action({}, f.robot, f.robot, 4, 100);
  Plan p{a};
  EXPECT_FALSE(enumerate_completions(f.robot, p, 4, 10).plans.empty());
  EXPECT_THROW(predictability({"move_loc1_loc2"}, f.robot, 4, 10), PrefixInexecutable);
}
