#pragma once

#include "hap/ops.hpp"

namespace hap {

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"fetch",          "restaurant-a",   "restaurant-b", "restaurant-c",
                                                 "usar-balanced",  "usar-uncertain", "usar-dialogue", "delivery",
                                                 "ladder",         "grid"};
  return names;
}

// Workspace view of a fixture, for the plan/explain verbs and the service.
inline Workspace scenario_workspace(const std::string& name) {
  Workspace w;
  if (name == "fetch") {
    auto f = fixtures::fetch();
    w.robot = f.robot;
    w.mental = f.mental;
    w.plan = f.plan;
  } else if (name == "usar-balanced") {
    auto u = fixtures::usar_balanced();
    w.robot = u.robot;
    w.mental = u.mental;
  } else if (name == "usar-uncertain" || name == "usar-dialogue") {
    auto u = name == "usar-uncertain" ? fixtures::usar_uncertain() : fixtures::usar_dialogue();
    w.robot = u.robot;
    w.annotated = u.human;
    w.plan = u.plan;
  } else if (name == "delivery") {
    auto d = fixtures::delivery();
    w.robot = d.robot;
    w.goals = d.goals;
    w.true_goal = d.true_goal;
    std::map<std::string, ObservationToken> table;
    for (const auto& [a, _] : d.robot.actions) table[a] = a.rfind("load", 0) == 0 ? "load" : "deliver";
    w.sensor = sensor_table_to_json(table);
  } else if (name == "grid") {
    auto g = fixtures::column_goals(0);
    w.robot = g.robot;
    w.goals = g.goals;
    w.true_goal = g.true_goal;
    std::map<std::string, ObservationToken> table;
    for (const auto& [a, _] : g.robot.actions) table[a] = "col" + a.substr(a.size() - 1);
    w.sensor = sensor_table_to_json(table);
  } else {
    throw SchemaError("scenario '" + name + "' has no workspace form", "/scenario");
  }
  return w;
}

inline json run_scenario(const std::string& name, uint64_t seed = 0) {
  if (name == "fetch") {
    auto w = scenario_workspace(name);
    json out{{"schema_version", kSchemaVersion}, {"scenario", name}};
    for (const char* t : {"ppe", "mpe", "mce", "mme"}) out[t] = run_explain(w, t, json::object());
    return out;
  }
  if (name.rfind("restaurant-", 0) == 0 && name.size() == 12) {
    json out = run_design(fixtures::restaurant(name.back()).problem);
    out["scenario"] = name;
    return out;
  }
  if (name == "usar-balanced") {
    auto w = scenario_workspace(name);
    json out{{"schema_version", kSchemaVersion}, {"scenario", name}};
    json params{{"message_cost", 50}, {"ie_map", "exponential"}};
    for (const char* m : {"optimal-balanced", "perfectly-explicable", "perfectly-explicable-optimal"}) {
      params["balance_mode"] = m;
      out[m] = run_plan(w, "balanced", params);
    }
    auto d = optimality_delta(w.robot);
    out["optimality_delta"] = {{"value", cost_to_json(d.value)}, {"exact", d.exact}};
    return out;
  }
  if (name == "usar-uncertain") {
    auto w = scenario_workspace(name);
    json out = run_explain(w, "conformant", json::object());
    auto e = conformant_explain(*w.plan, w.robot, *w.annotated);
    out["robustness_before"] = rational_to_json(robustness(*w.plan, *w.annotated, {}).value);
    out["robustness_after"] = rational_to_json(robustness(*w.plan, *w.annotated, e.edits).value);
    out["scenario"] = name;
    return out;
  }
  if (name == "usar-dialogue") {
    json out = run_explain(scenario_workspace(name), "conditional", json::object());
    out["scenario"] = name;
    return out;
  }
  if (name == "delivery") {
    auto d = fixtures::delivery();
    auto r = solver_guard([&] { return mo_copp_search(d, d.goals.size(), 1); });
    auto both_a = evaluate_mo_plan(d, {"load_a1", "load_a2", "deliver_a1", "deliver_a2"});
    return {{"schema_version", kSchemaVersion},
            {"scenario", name},
            {"plan", r.plan},
            {"goals_x", r.goals_x},
            {"goals_c", r.goals_c},
            {"gd", to_double(r.gd)},
            {"both_from_a_gd", to_double(both_a.gd)}};
  }
  if (name == "ladder") {
    auto g = fixtures::ladder_game();
    SamplerConfig cfg;
    cfg.seed = seed;
    cfg.budget = 200;
    std::vector<Plan> foils = {{"move-left", "move-left"},
                               {"move-left", "attack", "move-left", "move-left", "pick-key"}};
    json out = run_probe(g.sim, g.concepts, g.plan, foils, cfg);
    out["scenario"] = name;
    return out;
  }
  if (name == "grid") {
    json out = run_plan(scenario_workspace(name), "obfuscate", {{"k", 2}, {"secure", true}, {"seed", seed}});
    out["scenario"] = name;
    return out;
  }
  throw SchemaError("unknown scenario '" + name + "'", "/scenario");
}

}  // namespace hap
