#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace hap;

TEST(Rational, MixedComparisonsTerminate) {
  Rational r(3, 2);
  EXPECT_FALSE(r == 1);
  EXPECT_TRUE(Rational(2) == 2);
  EXPECT_TRUE(2 == Rational(2));
  EXPECT_TRUE(r != 1);
}

TEST(Rational, ParsesDecimalsAndFractions) {
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("-3/6"), Rational(-1, 2));
  EXPECT_EQ(parse_rational("7"), Rational(7));
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational(""), std::invalid_argument);
}

TEST(Cost, InfinityAbsorbsAndOrders) {
  Cost inf = Cost::infinity();
  EXPECT_TRUE(Cost(5) < inf);
  EXPECT_TRUE((inf + Cost(1)).is_inf());
  EXPECT_TRUE(Cost(Rational(1, 2)) + Cost(Rational(1, 2)) == Cost(1));
}

TEST(Model, CheckRejectsUndeclaredAndNonPositive) {
  PlanningModel m;
  m.fluents = {"p"};
  m.actions["a"] = ActionDef{"a", {"p"}, {"q"}, {}, 1};
  EXPECT_THROW(m.check(), ModelError);
  m.fluents.insert("q");
  m.check();
  m.actions["a"].cost = 0;
  EXPECT_THROW(m.check(), ModelError);
}

TEST(Model, ValidateReportsFirstFailure) {
  auto f = fixtures::fetch();
  auto v = validate_plan(f.robot, {"pick-up_b1_loc1", "move_loc1_loc2"});
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.failure_index, 1);
  EXPECT_TRUE(executable(f.robot, f.plan));
  EXPECT_EQ(plan_cost(f.robot, f.plan), Cost(4));
  EXPECT_THROW(validate_plan(f.robot, {"fly"}), UnknownAction);
}

TEST(Model, AbstractionDropsFluents) {
  auto f = fixtures::fetch();
  auto a = abstract_model(f.robot, {"crouched", "hand-tucked"});
  EXPECT_TRUE(a.actions.at("move_loc1_loc2").pre == std::set<Fluent>{"robot-at_loc1"});
  EXPECT_EQ(a.fluents.count("crouched"), 0u);
}

TEST(Planner, FetchOptimalCostIsFour) {
  auto f = fixtures::fetch();
  auto r = optimal_plan(f.robot);
  EXPECT_EQ(r.cost, Rational(4));
  EXPECT_TRUE(oracle::optimal_in(f.robot, r.plan));
}

TEST(Planner, UnsolvableThrows) {
  PlanningModel m;
  m.fluents = {"p", "q"};
  m.init = {"p"};
  m.goal = {"q"};
  EXPECT_THROW(optimal_plan(m), Unsolvable);
  EXPECT_TRUE(optimal_cost(m).is_inf());
}

TEST(Planner, AgreesWithUniformCostOracleOnRandomModels) {
  oracle::Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    auto m = oracle::random_model(rng, {6, 6, 2, 2, 1, 3, 2});
    auto o = oracle::optimum(m);
    ASSERT_TRUE(o.has_value());
    auto r = optimal_plan(m);
    EXPECT_EQ(r.cost, *o) << "instance " << i;
    auto c = oracle::cost_of(m, r.plan);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(*c, *o);
  }
}

TEST(Planner, EnumeratedOptimalPlansAreAllOptimal) {
  oracle::Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    auto m = oracle::random_model(rng);
    auto o = *oracle::optimum(m);
    auto ps = enumerate_optimal(m, 50);
    ASSERT_FALSE(ps.plans.empty());
    for (const auto& p : ps.plans) EXPECT_EQ(*oracle::cost_of(m, p), o);
  }
}

TEST(Planner, BoundedEnumerationRespectsBound) {
  auto f = fixtures::fetch();
  auto ps = enumerate_valid_bounded(f.robot, 5, 100);
  ASSERT_FALSE(ps.plans.empty());
  for (const auto& p : ps.plans) {
    auto c = oracle::cost_of(f.robot, p);
    ASSERT_TRUE(c.has_value());
    EXPECT_LE(*c, Rational(5));
  }
}

TEST(Gamma, RoundTripsModels) {
  oracle::Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    auto m = oracle::random_model(rng);
    EXPECT_EQ(gamma_inverse(gamma_map(m), m.fluents), m);
  }
}

TEST(Gamma, DifferenceTransformsOneModelIntoTheOther) {
  oracle::Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    auto r = oracle::random_model(rng);
    auto h = oracle::perturb(rng, r, 1 + oracle::pick(rng, 8));
    auto d = model_difference(h, r);
    EXPECT_EQ(apply_explanation(h, d), r);
    EXPECT_EQ(d.size(), oracle::difference(h, r).size());
    EXPECT_EQ(oracle::edited(h, d), r);
  }
}

TEST(Gamma, FeatureKeysParseBack) {
  for (const auto& f : {Feature::init("a"), Feature::goal("b"), Feature::pre("act", "c"), Feature::add("act", "d"),
                        Feature::del("act", "e"), Feature::cost_of("act", Rational(3, 2))})
    EXPECT_EQ(parse_feature(f.key()), f);
  EXPECT_THROW(parse_feature("nonsense"), MalformedEdit);
}

TEST(Bits, SetOperations) {
  Bits a(70), b(70);
  a.set(3);
  a.set(65);
  b.set(65);
  EXPECT_TRUE(a.contains(b));
  EXPECT_FALSE(b.contains(a));
  EXPECT_EQ(a.count(), 2u);
  a.subtract(b);
  EXPECT_EQ(a.indices(), std::vector<size_t>{3});
}
