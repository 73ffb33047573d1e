#include "hap/scenarios.hpp"
#include "support/instances.hpp"

#include <gtest/gtest.h>

using namespace hap;

namespace {

std::pair<size_t, size_t> parse_position(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ParseError& e) {
    return {e.line, e.column};
  }
  return {0, 0};
}

std::string schema_path(const json& j) {
  try {
    workspace_from_json(j);
  } catch (const SchemaError& e) {
    return e.path;
  }
  return "<none>";
}

}  // namespace

TEST(Io, JsonModelRoundTrip) {
  oracle::Rng rng(21);
  for (int it = 0; it < 200; ++it) {
    auto m = oracle::random_model(rng);
    m.actions.begin()->second.cost = Rational(3, 2);
    auto j = model_to_json(m);
    EXPECT_EQ(j["schema_version"], kSchemaVersion);
    EXPECT_EQ(model_from_json(j), m);
    EXPECT_EQ(parse_model(j.dump()), m);
  }
}

TEST(Io, StripsRoundTrip) {
  oracle::Rng rng(22);
  for (int it = 0; it < 200; ++it) {
    auto m = oracle::random_model(rng);
    EXPECT_EQ(parse_model(serialize_strips(m)), m);
  }
  auto f = fixtures::fetch();
  EXPECT_EQ(parse_strips(serialize_strips(f.robot, "fetch")).name, "fetch");
  EXPECT_EQ(parse_model(serialize_strips(f.mental)), f.mental);
}

TEST(Io, StripsDocument) {
  auto m = parse_model(R"((define (model door)
  (:fluents (open))
  (:init (at a))
  (:goal (and (at b)))
  (:action go
    :parameters ()
    :precondition (and (at a) (open))
    :effect (and (at b) (not (at a)))
    :cost 5/2)
  (:action unlock :precondition (and) :effect (and (open))))
)");
  EXPECT_EQ(m.fluents, (std::set<Fluent>{"open", "at_a", "at_b"}));
  EXPECT_EQ(m.init, (std::set<Fluent>{"at_a"}));
  EXPECT_EQ(m.goal, (std::set<Fluent>{"at_b"}));
  EXPECT_EQ(m.action("go").pre, (std::set<Fluent>{"at_a", "open"}));
  EXPECT_EQ(m.action("go").del, (std::set<Fluent>{"at_a"}));
  EXPECT_EQ(m.action("go").cost, Rational(5, 2));
  EXPECT_EQ(m.action("unlock").cost, Rational(1));
}

TEST(Io, ParseErrorPositions) {
  EXPECT_EQ(parse_position("(define (model x)\n  (:init (a))\n  (:goal (and (b)))\n  (:bogus))"),
            (std::pair<size_t, size_t>{4, 4}));
  EXPECT_EQ(parse_position("(define (model x)\n  (:init (a)"), (std::pair<size_t, size_t>{2, 3}));
  EXPECT_EQ(parse_position(")"), (std::pair<size_t, size_t>{1, 1}));
  EXPECT_EQ(parse_position("(define (model x) (:init) (:goal (and)) (:action a :cost x))"),
            (std::pair<size_t, size_t>{1, 58}));
  EXPECT_EQ(parse_position("(define (model x) (:goal (and)))"), (std::pair<size_t, size_t>{1, 1}));
  EXPECT_EQ(parse_position("(define (model x) (:init) (:goal (and (not (a)))))"), (std::pair<size_t, size_t>{1, 39}));
  EXPECT_EQ(parse_position("{\n  \"actions\": [,]\n}"), (std::pair<size_t, size_t>{2, 15}));
  EXPECT_THROW(parse_model("(define (model x) (:init) (:goal (and)) (:action a) (:action a))"), ParseError);
  EXPECT_THROW(parse_model("(define (model x) (:init) (:goal (and))) (define (model y))"), ParseError);
}

TEST(Io, SchemaErrorPaths) {
  auto robot = model_to_json(fixtures::fetch().robot);
  EXPECT_EQ(schema_path(json::array()), "");
  EXPECT_EQ(schema_path(json::object()), "");
  EXPECT_EQ(schema_path({{"robot", robot}, {"schema_version", 7}}), "/schema_version");
  auto bad_actions = robot;
  bad_actions["actions"] = 3;
  EXPECT_EQ(schema_path({{"robot", bad_actions}}), "/robot/actions");
  auto bad_name = robot;
  bad_name["actions"][0]["name"] = "";
  EXPECT_EQ(schema_path({{"robot", bad_name}}), "/robot/actions/0/name");
  auto bad_cost = robot;
  bad_cost["actions"][1]["cost"] = "x/y";
  EXPECT_EQ(schema_path({{"robot", bad_cost}}), "/robot/actions/1/cost");
  EXPECT_EQ(schema_path({{"robot", robot}, {"plan", "move"}}), "/plan");
  EXPECT_EQ(schema_path({{"robot", robot}, {"goals", {{"a"}}}, {"true_goal", 4}}), "/true_goal");
  EXPECT_EQ(schema_path({{"robot", robot}, {"sensor", 5}}), "/sensor");
  json sensor{{"tokens", {"t"}}, {"table", {{{"action", "tuck"}, {"token", "u"}}}}};
  EXPECT_EQ(schema_path({{"robot", robot}, {"sensor", sensor}}), "/sensor/table/0");
  json annotated = robot;
  annotated["annotations"] = {{"possible_nothing", json::array()}};
  EXPECT_EQ(schema_path({{"robot", robot}, {"annotated", annotated}}), "/annotated/annotations/possible_nothing");
  annotated["annotations"] = {{"possible_pre", {{{"fluent", "x"}, {"prob", "1/2"}}}}};
  EXPECT_EQ(schema_path({{"robot", robot}, {"annotated", annotated}}), "/annotated/annotations/possible_pre/0");
}

TEST(Io, WorkspaceRoundTrip) {
  for (const auto& name : {"fetch", "usar-balanced", "usar-uncertain", "usar-dialogue", "delivery", "grid"}) {
    auto w = scenario_workspace(name);
    auto j = workspace_to_json(w);
    auto back = workspace_from_json(json::parse(j.dump()));
    EXPECT_EQ(back.robot, w.robot) << name;
    EXPECT_EQ(back.mental, w.mental) << name;
    EXPECT_EQ(back.goals, w.goals) << name;
    EXPECT_EQ(back.plan, w.plan) << name;
    EXPECT_EQ(workspace_to_json(back), j) << name;
  }
}

TEST(Io, EditsAndRationals) {
  auto f = fixtures::fetch();
  auto e = mce(make_mrp(f.plan, f.robot, f.mental));
  for (const auto& x : e.edits) {
    auto j = edit_to_json(x);
    EXPECT_EQ(edit_from_json(j), x);
  }
  EXPECT_THROW(edit_from_json({{"op", "toggle"}, {"feature", "init-has-a"}}), SchemaError);
  EXPECT_THROW(edit_from_json({{"op", "add"}, {"feature", "nonsense"}}), SchemaError);
  for (auto r : {Rational(0), Rational(7), Rational(-3, 4), Rational(22, 7)})
    EXPECT_EQ(rational_from_json(rational_to_json(r), ""), r);
  EXPECT_EQ(rational_from_json(json(0.25), ""), Rational(1, 4));
  EXPECT_THROW(rational_from_json(json(true), "/x"), SchemaError);
  EXPECT_EQ(cost_to_json(Cost::infinity()), "inf");
}
