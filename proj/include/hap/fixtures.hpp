#pragma once

#include "hap/annotated.hpp"
#include "hap/concepts.hpp"
#include "hap/explicable.hpp"
#include "hap/observer.hpp"
#include "hap/reconcile.hpp"

#include <sstream>

namespace hap::fixtures {

inline ActionDef action(std::string name, std::set<Fluent> pre, std::set<Fluent> add, std::set<Fluent> del,
                        Rational cost = 1) {
  return {std::move(name), std::move(pre), std::move(add), std::move(del), cost};
}

// ---- fetch ----

struct FetchFixture {
  PlanningModel robot;
  PlanningModel mental;
  Plan plan;
};

inline FetchFixture fetch() {
  PlanningModel r;
  r.fluents = {"robot-at_loc1", "robot-at_loc2", "block-at_b1_loc1", "block-at_b1_loc2",
               "holding_b1",    "hand-empty",    "hand-tucked",      "crouched"};
  r.add_action(action("pick-up_b1_loc1", {"robot-at_loc1", "block-at_b1_loc1", "hand-empty"}, {"holding_b1"},
                      {"block-at_b1_loc1", "hand-empty"}));
  r.add_action(action("put-down_b1_loc2", {"robot-at_loc2", "holding_b1"}, {"block-at_b1_loc2", "hand-empty"},
                      {"holding_b1"}));
  r.add_action(action("tuck", {}, {"hand-tucked", "crouched"}, {}));
  r.add_action(action("crouch", {}, {"crouched"}, {}));
  r.add_action(action("move_loc1_loc2", {"robot-at_loc1", "hand-tucked", "crouched"}, {"robot-at_loc2"},
                      {"robot-at_loc1"}));
  r.init = {"robot-at_loc1", "block-at_b1_loc1", "hand-empty"};
  r.goal = {"block-at_b1_loc2"};

  PlanningModel h = r;
  h.actions["tuck"].add = {"hand-tucked"};
  h.actions["move_loc1_loc2"].pre = {"robot-at_loc1"};
  return {r, h, {"pick-up_b1_loc1", "tuck", "move_loc1_loc2", "put-down_b1_loc2"}};
}

// ---- passage graphs ----

inline std::string node_pair(const std::string& a, const std::string& b) { return a < b ? a + "_" + b : b + "_" + a; }
inline Fluent at(const std::string& n) { return "at_" + n; }
inline Fluent clear(const std::string& a, const std::string& b) { return "clear_" + node_pair(a, b); }

// Moves in both directions along each edge; a move needs the (undirected) clear fluent of its edge.
inline PlanningModel passage_graph(const std::vector<std::pair<std::string, std::string>>& edges, Rational move_cost) {
  PlanningModel m;
  for (const auto& [a, b] : edges) {
    m.fluents.insert(clear(a, b));
    m.fluents.insert(at(a));
    m.fluents.insert(at(b));
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}})
      m.add_action(action("move_" + x + "_" + y, {at(x), clear(a, b)}, {at(y)}, {at(x)}, move_cost));
  }
  return m;
}

inline Plan route(const std::vector<std::string>& nodes) {
  Plan p;
  for (size_t i = 0; i + 1 < nodes.size(); ++i) p.push_back("move_" + nodes[i] + "_" + nodes[i + 1]);
  return p;
}

// ---- search and rescue: balanced planning ----

struct UsarBalanced {
  PlanningModel robot;
  PlanningModel mental;
  Rational message_cost{50};
  Plan rubble_route;
  Plan human_route;
  Plan alternate_route;
  Edit blocked_for_human;   // remove init clear on the human's preferred route
  Edit open_for_human;      // add init clear on the alternate route
};

inline UsarBalanced usar_balanced() {
  std::vector<std::pair<std::string, std::string>> edges = {
      {"p1", "p2"},  {"p2", "p3"},   {"p3", "p4"},   {"p4", "p10"},  {"p10", "p17"},
      {"p1", "p7"},  {"p7", "p15"},  {"p15", "p16"}, {"p16", "p17"}, {"p1", "p5"},
      {"p5", "p6"},  {"p6", "p11"},  {"p11", "p12"}, {"p12", "p17"}};
  PlanningModel base = passage_graph(edges, 2);
  base.add_action(action("clear_passage_p5_p6", {at("p5")}, {clear("p5", "p6")}, {}, 1));
  base.goal = {at("p17")};
  base.init = {at("p1")};
  for (const auto& [a, b] : edges) base.init.insert(clear(a, b));
  base.init.erase(clear("p5", "p6"));

  UsarBalanced u;
  u.robot = base;
  u.robot.init.erase(clear("p16", "p17"));
  u.mental = base;
  u.mental.init.erase(clear("p2", "p3"));
  u.rubble_route = {"move_p1_p5", "clear_passage_p5_p6", "move_p5_p6", "move_p6_p11", "move_p11_p12", "move_p12_p17"};
  u.human_route = route({"p1", "p7", "p15", "p16", "p17"});
  u.alternate_route = route({"p1", "p2", "p3", "p4", "p10", "p17"});
  u.blocked_for_human = Edit{false, Feature::init(clear("p16", "p17")), false};
  u.open_for_human = Edit{true, Feature::init(clear("p2", "p3")), false};
  return u;
}

// ---- search and rescue: uncertain mental model ----

struct UsarUncertain {
  PlanningModel robot;
  AnnotatedModel human;
  Plan plan;
  std::vector<Edit> expected;
};

inline UsarUncertain usar_uncertain() {
  std::vector<std::pair<std::string, std::string>> known_clear = {{"p1", "p2"}, {"p2", "p3"}, {"p3", "p7"}, {"p7", "p5"},
                                                                  {"p8", "p4"}, {"p9", "p5"}, {"p6", "p5"}};
  auto edges = known_clear;
  for (auto e : {std::pair<std::string, std::string>{"p1", "p6"}, {"p1", "p9"}, {"p4", "p5"}, {"p3", "p8"}})
    edges.push_back(e);
  PlanningModel base = passage_graph(edges, 1);
  base.fluents.insert("hand_capable");
  base.init = {at("p1")};
  for (const auto& [a, b] : known_clear) base.init.insert(clear(a, b));
  base.goal = {at("p5")};

  UsarUncertain u;
  u.robot = base;
  u.robot.add_action(action("clear_passage_p1_p6", {at("p1"), "hand_capable"}, {clear("p1", "p6")}, {}, 1));
  u.human.known = base;
  u.human.known.add_action(action("clear_passage_p1_p6", {at("p1")}, {clear("p1", "p6")}, {}, 1));
  u.human.known.init.insert("hand_capable");
  u.human.possible = {
      {Slot::pre, "clear_passage_p1_p6", "hand_capable", Rational(1, 2)},
      {Slot::init, "", clear("p1", "p9"), Rational(1, 2)},
      {Slot::init, "", clear("p4", "p5"), Rational(1, 2)},
      {Slot::init, "", clear("p3", "p8"), Rational(1, 2)},
  };
  u.plan = route({"p1", "p2", "p3", "p7", "p5"});
  u.expected = {Edit{true, Feature::pre("clear_passage_p1_p6", "hand_capable"), true},
                Edit{false, Feature::init("hand_capable"), false},
                Edit{false, Feature::init(clear("p1", "p9")), true}};
  std::sort(u.expected.begin(), u.expected.end());
  return u;
}

// ---- search and rescue: question-asking dialogue ----

inline UsarUncertain usar_dialogue() {
  std::vector<std::pair<std::string, std::string>> known_clear = {{"p1", "p2"}, {"p2", "p3"}, {"p3", "p5"}, {"p4", "p5"}};
  auto edges = known_clear;
  edges.push_back({"p1", "p4"});
  edges.push_back({"p1", "p9"});
  PlanningModel base = passage_graph(edges, 1);
  base.init = {at("p1")};
  for (const auto& [a, b] : known_clear) base.init.insert(clear(a, b));
  base.goal = {at("p5")};

  UsarUncertain u;
  u.robot = base;
  u.human.known = base;
  u.human.possible = {{Slot::init, "", clear("p1", "p4"), Rational(1, 2)},
                      {Slot::init, "", clear("p1", "p9"), Rational(1, 2)}};
  u.plan = route({"p1", "p2", "p3", "p5"});
  u.expected = {Edit{false, Feature::init(clear("p1", "p4")), false}};
  return u;
}

// ---- restaurant environment design ----

inline std::string cell(int r, int c) { return "r" + std::to_string(r) + "_c" + std::to_string(c); }
inline Fluent passable(const std::string& a, const std::string& b) { return "passable_" + node_pair(a, b); }

struct RestaurantFixture {
  DesignProblem problem;
  std::vector<std::string> expected_pair;
};

inline PlanningModel restaurant_model(int booth_row, int booth_col, bool mental) {
  std::set<std::string> blocked_cells = {cell(0, 1), cell(1, 1)};
  PlanningModel m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      m.fluents.insert("at_" + cell(r, c));
      for (auto [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}}) {
        int r2 = r + dr, c2 = c + dc;
        if (r2 > 2 || c2 > 2) continue;
        std::string a = cell(r, c), b = cell(r2, c2);
        Fluent p = passable(a, b);
        m.fluents.insert(p);
        for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}})
          m.add_action(action("move_" + x + "_" + y, {"at_" + x, p}, {"at_" + y}, {"at_" + x}, 5));
        if (mental || (!blocked_cells.count(a) && !blocked_cells.count(b))) m.init.insert(p);
      }
    }
  std::string kitchen = cell(0, 0), booth = cell(booth_row, booth_col);
  m.add_action(action("pick-up_food", {"at_" + kitchen, "hand-free"}, {"holding_food"}, {"hand-free"}, 1));
  m.add_action(action("put-down_food_" + booth, {"at_" + booth, "holding_food"}, {"served", "hand-free"},
                      {"holding_food"}, 1));
  m.init.insert("at_" + kitchen);
  m.init.insert("hand-free");
  m.goal = {"served"};
  return m;
}

// Setting 'a': one booth, one interaction. 'b': two booths, one interaction. 'c': two booths, ten interactions.
inline RestaurantFixture restaurant(char setting) {
  RestaurantFixture f;
  DesignProblem& dp = f.problem;
  auto task = [](int r, int c, Rational p) {
    return DesignTask{restaurant_model(r, c, false), restaurant_model(r, c, true), p};
  };
  if (setting == 'a') {
    dp.tasks = {task(0, 2, 1)};
  } else {
    dp.tasks = {task(0, 2, Rational(1, 2)), task(1, 2, Rational(1, 2))};
  }
  dp.horizon = setting == 'c' ? 10 : 1;
  dp.discount = Rational(9, 10);
  dp.alpha = 1;
  dp.beta = 30;
  dp.kappa = Rational(1, 4);
  std::vector<std::pair<std::string, std::string>> blocked = {{cell(0, 0), cell(0, 1)}, {cell(0, 1), cell(0, 2)},
                                                              {cell(0, 1), cell(1, 1)}, {cell(1, 0), cell(1, 1)},
                                                              {cell(1, 1), cell(1, 2)}, {cell(1, 1), cell(2, 1)}};
  for (const auto& [a, b] : blocked) {
    Modification m;
    m.id = "barrier_" + node_pair(a, b);
    m.edits = {ModEdit{Edit{false, Feature::init(passable(a, b)), false}, ModTarget::mental}};
    m.cost = 1;
    dp.mods.push_back(m);
  }
  f.expected_pair = {"barrier_" + node_pair(cell(0, 0), cell(0, 1)), "barrier_" + node_pair(cell(1, 0), cell(1, 1))};
  std::sort(f.expected_pair.begin(), f.expected_pair.end());
  return f;
}

// ---- delivery with two observers ----

inline MOCOPPProblem delivery() {
  MOCOPPProblem p;
  std::vector<std::string> pkgs = {"a1", "a2", "b1", "b2"};
  std::map<std::string, ObservationToken> tx, tc;
  for (const auto& k : pkgs) {
    p.robot.add_action(action("load_" + k, {"at-factory_" + k}, {"loaded_" + k}, {"at-factory_" + k}));
    p.robot.add_action(action("deliver_" + k, {"loaded_" + k}, {"delivered_" + k}, {"loaded_" + k}));
    p.robot.init.insert("at-factory_" + k);
    tx["load_" + k] = "load";
    tx["deliver_" + k] = "deliver";
    tc["load_" + k] = k[0] == 'a' ? "load-A" : "load-B";
    tc["deliver_" + k] = "deliver";
  }
  for (size_t i = 0; i < pkgs.size(); ++i)
    for (size_t j = i + 1; j < pkgs.size(); ++j) p.goals.push_back({"delivered_" + pkgs[i], "delivered_" + pkgs[j]});
  p.true_goal = 0;
  p.robot.goal = p.goals[0];
  p.sensor_x = SensorModel::table(tx);
  p.sensor_c = SensorModel::table(tc);
  return p;
}

// ---- grid navigation for observer-aware planning ----

// Four-connected grid; the observer sees only the column entered by each move.
inline COPPProblem grid_copp(int rows, int cols, std::pair<int, int> start, const std::vector<std::pair<int, int>>& goals,
                             size_t true_goal) {
  COPPProblem p;
  std::map<std::string, ObservationToken> tokens;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      p.robot.fluents.insert("at_" + cell(r, c));
      for (auto [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}, std::pair{0, -1}, std::pair{-1, 0}}) {
        int r2 = r + dr, c2 = c + dc;
        if (r2 < 0 || c2 < 0 || r2 >= rows || c2 >= cols) continue;
        std::string name = "move_" + cell(r, c) + "_" + cell(r2, c2);
        p.robot.add_action(action(name, {"at_" + cell(r, c)}, {"at_" + cell(r2, c2)}, {"at_" + cell(r, c)}));
        tokens[name] = "col" + std::to_string(c2);
      }
    }
  p.robot.init = {"at_" + cell(start.first, start.second)};
  for (auto [r, c] : goals) p.goals.push_back({"at_" + cell(r, c)});
  p.true_goal = true_goal;
  p.robot.goal = p.goals[true_goal];
  p.sensor = SensorModel::table(tokens);
  return p;
}

// Three goal cells of equal parity in the far column, start in the middle row of the first column.
inline COPPProblem column_goals(size_t true_goal) {
  return grid_copp(5, 4, {2, 0}, {{0, 3}, {2, 3}, {4, 3}}, true_goal);
}

// ---- two-level ladder game as a black-box simulator ----

struct LadderState {
  int level = 0;
  int pos = 3;
  bool key = false;
  bool skull = true;

  StateId id() const {
    std::ostringstream os;
    os << level << ',' << pos << ',' << key << ',' << skull;
    return os.str();
  }
  static LadderState parse(const StateId& s) {
    LadderState out;
    char c;
    int k, sk;
    std::istringstream is(s);
    is >> out.level >> c >> out.pos >> c >> k >> c >> sk;
    out.key = k != 0;
    out.skull = sk != 0;
    return out;
  }
  bool skull_on_left() const { return level == 0 && pos == 2 && skull; }
  bool on_ladder() const { return pos == 0 || pos == 2; }
};

struct LadderGame {
  BlackboxSim sim;
  std::vector<Concept> concepts;
  Plan plan;
};

inline LadderGame ladder_game() {
  LadderGame g;
  g.sim.initial = LadderState{}.id();
  g.sim.actions = {"move-left", "move-right", "climb-up", "climb-down", "pick-key", "attack"};
  g.sim.step = [](const StateId& id, const std::string& a) -> std::optional<StateId> {
    LadderState s = LadderState::parse(id);
    if (a == "move-left") {
      if (s.pos == 0 || s.skull_on_left()) return std::nullopt;
      --s.pos;
    } else if (a == "move-right") {
      if (s.pos == 4 || (s.level == 0 && s.pos == 0 && s.skull)) return std::nullopt;
      ++s.pos;
    } else if (a == "climb-up") {
      if (s.level != 0 || !s.on_ladder()) return std::nullopt;
      s.level = 1;
    } else if (a == "climb-down") {
      if (s.level != 1 || !s.on_ladder()) return std::nullopt;
      s.level = 0;
    } else if (a == "pick-key") {
      if (s.level != 0 || s.pos != 0 || s.key) return std::nullopt;
      s.key = true;
    } else if (a == "attack") {
      s.skull = false;
    } else {
      return std::nullopt;
    }
    return s.id();
  };
  g.sim.cost = [](const StateId& id, const std::string& a) -> Rational {
    if (a == "attack") return LadderState::parse(id).skull_on_left() ? 500 : 1;
    if (a == "climb-up" || a == "climb-down") return 4;
    return 3;
  };
  g.sim.goal_test = [](const StateId& id) { return LadderState::parse(id).key; };
  g.sim.render = [](const StateId& id) { return id; };
  auto concept_of = [](std::string name, std::function<bool(const LadderState&)> f) {
    return Concept{std::move(name), [f = std::move(f)](const StateId& id) { return f(LadderState::parse(id)); }, {}};
  };
  g.concepts = {
      concept_of("skull-on-left", [](const LadderState& s) { return s.skull_on_left(); }),
      concept_of("skull-not-on-left", [](const LadderState& s) { return !s.skull_on_left(); }),
      concept_of("on-ladder", [](const LadderState& s) { return s.on_ladder(); }),
      concept_of("not-on-ladder", [](const LadderState& s) { return !s.on_ladder(); }),
      concept_of("has-key", [](const LadderState& s) { return s.key; }),
      concept_of("no-key", [](const LadderState& s) { return !s.key; }),
      concept_of("upper-level", [](const LadderState& s) { return s.level == 1; }),
      concept_of("lower-level", [](const LadderState& s) { return s.level == 0; }),
      concept_of("skull-alive", [](const LadderState& s) { return s.skull; }),
      concept_of("at-left-wall", [](const LadderState& s) { return s.pos == 0; }),
  };
  g.plan = {"move-left", "climb-up", "move-left", "move-left", "climb-down", "pick-key"};
  return g;
}

}  // namespace hap::fixtures
