#pragma once

#include "hap/balanced.hpp"
#include "hap/concepts.hpp"
#include "hap/explicable.hpp"
#include "hap/fixtures.hpp"
#include "hap/io.hpp"
#include "hap/reconcile.hpp"

namespace hap {

struct SolverError : std::runtime_error {
  std::string reason;
  SolverError(std::string r, const std::string& msg) : std::runtime_error(msg), reason(std::move(r)) {}
};

// Everything a plan or explain request runs against.
struct Workspace {
  PlanningModel robot;
  std::optional<PlanningModel> mental;
  std::optional<AnnotatedModel> annotated;
  std::vector<std::set<Fluent>> goals;
  size_t true_goal = 0;
  json sensor = "identity";
  std::optional<Plan> plan;
};

namespace detail {

inline PlanningModel model_field(const json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return parse_model(j.get<std::string>());
    } catch (const ParseError& e) {
      throw SchemaError(e.what(), path);
    }
  }
  return model_from_json(j, path);
}

template <class T>
T number_or(const json& params, const std::string& key, T fallback) {
  if (!params.contains(key)) return fallback;
  const json& v = params[key];
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw SchemaError("expected a boolean", "/params/" + key);
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw SchemaError("expected a non-negative integer", "/params/" + key);
  } else {
    if (!v.is_number()) throw SchemaError("expected a number", "/params/" + key);
  }
  return v.get<T>();
}

inline Rational rational_or(const json& params, const std::string& key, Rational fallback) {
  if (!params.contains(key)) return fallback;
  return rational_from_json(params[key], "/params/" + key);
}

inline std::string string_or(const json& params, const std::string& key, const std::string& fallback) {
  if (!params.contains(key)) return fallback;
  return string_at(params[key], "/params/" + key);
}

}  // namespace detail

inline Workspace workspace_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("expected an object", "");
  detail::check_version(j, "");
  Workspace w;
  w.robot = detail::model_field(detail::field(j, "robot", ""), "/robot");
  if (j.contains("mental")) w.mental = detail::model_field(j["mental"], "/mental");
  if (j.contains("annotated")) w.annotated = annotated_from_json(j["annotated"], "/annotated");
  if (j.contains("goals")) w.goals = goals_from_json(j["goals"], "/goals");
  if (j.contains("true_goal")) {
    if (!j["true_goal"].is_number_integer()) throw SchemaError("expected an integer", "/true_goal");
    w.true_goal = j["true_goal"].get<size_t>();
    if (!w.goals.empty() && w.true_goal >= w.goals.size()) throw SchemaError("index out of range", "/true_goal");
  }
  if (j.contains("sensor")) {
    sensor_from_json(j["sensor"], "/sensor");
    w.sensor = j["sensor"];
  }
  if (j.contains("plan")) w.plan = plan_from_json(j["plan"], "/plan");
  return w;
}

inline json workspace_to_json(const Workspace& w) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["robot"] = model_to_json(w.robot);
  if (w.mental) j["mental"] = model_to_json(*w.mental);
  if (w.annotated) j["annotated"] = annotated_to_json(*w.annotated);
  if (!w.goals.empty()) {
    j["goals"] = json::array();
    for (const auto& g : w.goals) j["goals"].push_back(std::vector<std::string>(g.begin(), g.end()));
    j["true_goal"] = w.true_goal;
  }
  j["sensor"] = w.sensor;
  if (w.plan) j["plan"] = *w.plan;
  return j;
}

// Runs f, translating library failures into SolverError with a machine-readable reason.
template <class F>
auto solver_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const SolverError&) {
    throw;
  } catch (const Unsolvable& e) {
    throw SolverError("unsolvable", e.what());
  } catch (const ResourceLimit& e) {
    throw SolverError("budget_exhausted", e.what());
  } catch (const InvalidPlan& e) {
    throw SolverError("invalid_plan", e.what());
  } catch (const NoExplanation& e) {
    throw SolverError("no_explanation", e.what());
  } catch (const NoLieFound& e) {
    throw SolverError("no_lie", e.what());
  } catch (const FoilSatisfiable& e) {
    throw SolverError("foil_satisfiable", e.what());
  } catch (const FoilValid& e) {
    throw SolverError("foil_valid", e.what());
  } catch (const NoObjectivePlan& e) {
    throw SolverError("no_objective_plan", e.what());
  } catch (const VocabularyMismatch& e) {
    throw SolverError("vocabulary_mismatch", e.what());
  } catch (const CompletionCapExceeded& e) {
    throw SolverError("completion_cap", e.what());
  } catch (const AllConfigsUnsolvable& e) {
    throw SolverError("all_configs_unsolvable", e.what());
  } catch (const SearchStuck& e) {
    throw SolverError("search_stuck", e.what());
  } catch (const FoilBetter& e) {
    throw SolverError("foil_better", e.what());
  } catch (const InsufficientSamples& e) {
    throw SolverError("insufficient_samples", e.what());
  } catch (const NoMatchingState& e) {
    throw SolverError("no_matching_state", e.what());
  } catch (const UnknownAction& e) {
    throw SolverError("unknown_action", e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what(), "/params");
  }
}

inline const PlanningModel& mental_of(const Workspace& w) {
  if (w.mental) return *w.mental;
  if (w.annotated) return w.annotated->known;
  throw SchemaError("a mental model is required", "/mental");
}

inline json copp_to_json(const COPPResult& r) {
  return {{"plan", r.plan},          {"tokens", r.tokens},     {"goals_in_final_belief", r.goals_in_final_belief},
          {"delta", r.delta},        {"expanded", r.expanded}, {"k_used", r.k_used}};
}

inline json balanced_to_json(const BalancedSolution& s) {
  json e = explanation_to_json(s.explanation);
  return {{"plan", s.task_fragment},
          {"augmented_plan", s.augmented_plan},
          {"explanation", e["edits"]},
          {"plan_cost", rational_to_json(s.plan_cost)},
          {"comm_cost", rational_to_json(s.comm_cost)},
          {"ie_penalty", s.ie_penalty},
          {"objective", s.objective},
          {"expanded", s.expanded}};
}

inline COPPProblem copp_problem(const Workspace& w) {
  if (w.goals.size() < 2) throw SchemaError("at least two candidate goals are required", "/goals");
  COPPProblem p;
  p.robot = w.robot;
  p.goals = w.goals;
  p.true_goal = w.true_goal;
  p.sensor = sensor_from_json(w.sensor, "/sensor");
  return p;
}

// Per-step belief sizes and goals for an observed plan, for visualization.
inline json belief_trace(const Workspace& w, const Plan& plan) {
  COPPProblem p = copp_problem(w);
  PlanningModel gm = p.robot;
  gm.goal = p.goals[p.true_goal];
  for (const auto& g : p.goals) gm.fluents.insert(g.begin(), g.end());
  Belief b{gm.init};
  json steps = json::array();
  TaskState s = gm.init;
  for (const auto& a : plan) {
    auto n = progress(gm, s, a);
    if (!n) throw SolverError("invalid_plan", "plan step '" + a + "' is not executable");
    s = *n;
    auto tok = p.sensor.observe(a, s);
    b = belief_update(gm, b, tok, p.sensor);
    steps.push_back({{"action", a}, {"token", tok}, {"belief_size", b.size()}, {"goals", goals_in_belief(b, p.goals)}});
  }
  return {{"plan", plan}, {"steps", steps}, {"goals_in_final_belief", goals_in_belief(b, p.goals)}};
}

inline json run_plan(const Workspace& w, const std::string& mode, const json& params) {
  return solver_guard([&]() -> json {
    json out{{"schema_version", kSchemaVersion}, {"mode", mode}};
    if (mode == "optimal") {
      auto r = optimal_plan(w.robot);
      out["plan"] = r.plan;
      out["cost"] = rational_to_json(r.cost);
    } else if (mode == "explicable") {
      ExplicableProblem ep{w.robot, mental_of(w), DistanceSpec::cost_difference(), 0};
      auto dist = detail::string_or(params, "distance", "cost-difference");
      if (dist != "cost-difference") ep.spec = DistanceSpec::of(distance_kind_from_string(dist));
      ep.max_cost = optimal_cost(w.robot).value() + detail::rational_or(params, "slack", 0);
      auto r = reconciliation_search(ep);
      out["plan"] = r.plan;
      out["cost"] = rational_to_json(r.cost);
      out["ie"] = cost_to_json(r.ie);
    } else if (mode == "balanced") {
      BalanceWeights bw;
      bw.alpha = detail::rational_or(params, "alpha", 1);
      bw.beta = detail::rational_or(params, "beta", 1);
      bw.gamma = detail::rational_or(params, "gamma", 1);
      bw.ie_map = detail::string_or(params, "ie_map", "linear") == "exponential" ? IeMap::exponential : IeMap::linear;
      BalanceOptions bo;
      bo.default_message_cost = detail::rational_or(params, "message_cost", 1);
      bo.observe_execution = detail::number_or<bool>(params, "observe_execution", false);
      auto bm = balance_mode_from_string(detail::string_or(params, "balance_mode", "optimal-balanced"));
      out["balance_mode"] = to_string(bm);
      out.update(balanced_to_json(balanced_plan(w.robot, mental_of(w), bw, bm, bo)));
    } else if (mode == "legible" || mode == "obfuscate") {
      COPPProblem p = copp_problem(w);
      COPPObjective obj;
      obj.node_budget = detail::number_or<size_t>(params, "budget", obj.node_budget);
      COPPResult r;
      if (mode == "legible") {
        obj.kind = ObjectiveKind::j_legible;
        obj.j = detail::number_or<size_t>(params, "j", 1);
        r = copp_search(p, obj);
      } else {
        auto kind = detail::string_or(params, "objective", "k-ambiguous");
        obj.kind = objective_kind_from_string(kind);
        obj.k = detail::number_or<size_t>(params, "k", 2);
        obj.m = detail::number_or<size_t>(params, "m", 2);
        obj.l = detail::number_or<size_t>(params, "l", 2);
        obj.d = detail::rational_or(params, "d", 0);
        if (detail::number_or<bool>(params, "secure", false))
          r = secure_k_ambiguous(p, obj.k, detail::number_or<uint64_t>(params, "seed", 0), obj);
        else
          r = copp_search(p, obj);
      }
      out.update(copp_to_json(r));
    } else {
      throw SchemaError("unknown mode '" + mode + "'", "/mode");
    }
    return out;
  });
}

inline json conditional_to_json(const ConditionalNode& n) {
  json j;
  switch (n.kind) {
    case ConditionalNode::Kind::done: j["kind"] = "done"; break;
    case ConditionalNode::Kind::tell:
      j["kind"] = "tell";
      j["edit"] = edit_to_json(n.edit);
      j["next"] = conditional_to_json(n.children[0]);
      break;
    case ConditionalNode::Kind::ask:
      j["kind"] = "ask";
      j["question"] = n.question.key();
      j["yes"] = conditional_to_json(n.children[0]);
      j["no"] = conditional_to_json(n.children[1]);
      break;
  }
  j["value"] = rational_to_json(n.value);
  return j;
}

inline Plan target_plan(const Workspace& w, const json& params) {
  if (params.contains("plan")) return plan_from_json(params["plan"], "/params/plan");
  if (w.plan) return *w.plan;
  return optimal_plan(w.robot).plan;
}

// Explanations of the workspace plan; edits whose feature keys are in `vetoed` are withheld from the answer.
inline json run_explain(const Workspace& w, const std::string& type, const json& params,
                        const std::set<std::string>& vetoed = {}) {
  return solver_guard([&]() -> json {
    Plan plan = target_plan(w, params);
    std::vector<Plan> foils;
    if (params.contains("foils")) {
      const json& fj = params["foils"];
      if (!fj.is_array()) throw SchemaError("expected an array of plans", "/foils");
      for (size_t i = 0; i < fj.size(); ++i) foils.push_back(plan_from_json(fj[i], "/foils/" + std::to_string(i)));
    }
    json out{{"schema_version", kSchemaVersion}, {"type", type}};
    Explanation e;
    if (type == "conformant" || type == "conditional") {
      if (!w.annotated) throw SchemaError("an annotated mental model is required", "/annotated");
      if (type == "conditional") {
        auto root = conditional_explain(plan, w.robot, *w.annotated);
        out["policy"] = conditional_to_json(root);
        std::string text;
        render_conditional(root, text);
        out["rendered"] = text;
        return out;
      }
      e = conformant_explain(plan, w.robot, *w.annotated);
    } else {
      MRP mrp = make_mrp(plan, w.robot, mental_of(w));
      if (type == "ppe") e = patch_explanations(mrp).ppe;
      else if (type == "mpe") e = patch_explanations(mrp).mpe;
      else if (type == "mce") e = mce(mrp);
      else if (type == "mme") e = mme(mrp);
      else if (type == "approx") e = approx_mce(mrp);
      else if (type == "contrastive") {
        if (foils.empty()) throw SchemaError("contrastive explanations need at least one foil", "/foils");
        e = contrastive_explain(mrp, foils);
      } else if (type == "lie") {
        auto mode = detail::string_or(params, "lie_mode", "unconstrained");
        e = lie_explain(mrp, mode == "omission-only" ? LieMode::omission_only : LieMode::unconstrained,
                        detail::number_or<size_t>(params, "depth", 3));
      } else {
        throw SchemaError("unknown explanation type '" + type + "'", "/type");
      }
    }
    std::vector<std::string> withheld;
    std::vector<Edit> kept;
    for (const auto& x : e.edits) {
      if (vetoed.count(x.key())) withheld.push_back(x.key());
      else kept.push_back(x);
    }
    if (!withheld.empty()) {
      e.edits = kept;
      e.complete = false;
    }
    out.update(explanation_to_json(e));
    out["type"] = type;
    out["withheld"] = withheld;
    return out;
  });
}

inline DesignProblem design_from_json(const json& j) {
  detail::check_version(j, "");
  DesignProblem dp;
  const json& tasks = detail::field(j, "tasks", "");
  if (!tasks.is_array() || tasks.empty()) throw SchemaError("expected a non-empty array", "/tasks");
  for (size_t i = 0; i < tasks.size(); ++i) {
    std::string p = "/tasks/" + std::to_string(i);
    DesignTask t;
    t.robot = detail::model_field(detail::field(tasks[i], "robot", p), p + "/robot");
    t.mental = detail::model_field(detail::field(tasks[i], "mental", p), p + "/mental");
    t.prob = tasks[i].contains("prob") ? rational_from_json(tasks[i]["prob"], p + "/prob") : Rational(1);
    dp.tasks.push_back(std::move(t));
  }
  if (j.contains("mods")) {
    const json& mods = j["mods"];
    if (!mods.is_array()) throw SchemaError("expected an array", "/mods");
    for (size_t i = 0; i < mods.size(); ++i) {
      std::string p = "/mods/" + std::to_string(i);
      Modification m;
      m.id = detail::string_at(detail::field(mods[i], "id", p), p + "/id");
      m.cost = mods[i].contains("cost") ? rational_from_json(mods[i]["cost"], p + "/cost") : Rational(1);
      const json& edits = detail::field(mods[i], "edits", p);
      if (!edits.is_array()) throw SchemaError("expected an array", p + "/edits");
      for (size_t k = 0; k < edits.size(); ++k) {
        std::string ep = p + "/edits/" + std::to_string(k);
        ModEdit me;
        me.edit = edit_from_json(edits[k], ep);
        auto target = edits[k].value("target", std::string("both"));
        if (target == "robot") me.target = ModTarget::robot;
        else if (target == "mental") me.target = ModTarget::mental;
        else if (target == "both") me.target = ModTarget::both;
        else throw SchemaError("target must be robot, mental or both", ep + "/target");
        m.edits.push_back(me);
      }
      dp.mods.push_back(std::move(m));
    }
  }
  dp.horizon = detail::number_or<size_t>(j, "horizon", 1);
  dp.discount = detail::rational_or(j, "discount", 0);
  dp.alpha = detail::rational_or(j, "alpha", 1);
  dp.beta = detail::rational_or(j, "beta", 1);
  dp.kappa = detail::rational_or(j, "kappa", 0);
  dp.cost_slack = detail::rational_or(j, "cost_slack", 0);
  return dp;
}

inline json run_design(const DesignProblem& dp) {
  return solver_guard([&]() -> json {
    auto r = design_search(dp);
    json tasks = json::array();
    for (const auto& t : r.per_task)
      tasks.push_back({{"plan", t.plan}, {"ie", cost_to_json(t.ie)}, {"cost", rational_to_json(t.cost)}});
    return {{"schema_version", kSchemaVersion},
            {"chosen", r.chosen},
            {"objective", r.objective},
            {"multiplier", longitudinal_multiplier(dp.discount, dp.horizon)},
            {"tasks", tasks},
            {"configs_evaluated", r.configs_evaluated},
            {"relevant", r.relevant}};
  });
}

// Concept-level answers about foils in a black-box simulator.
inline json run_probe(const BlackboxSim& sim, const std::vector<Concept>& concepts, const Plan& plan,
                      const std::vector<Plan>& foils, const SamplerConfig& cfg) {
  return solver_guard([&]() -> json {
    json out{{"schema_version", kSchemaVersion}, {"plan", plan}, {"plan_cost", rational_to_json(sim_cost(sim, plan))}};
    out["foils"] = json::array();
    for (const auto& f : foils) {
      auto fe = explain_foil(sim, concepts, plan, f, cfg);
      json jf{{"foil", f}, {"verdict", to_string(fe.verdict)}};
      if (fe.failure) {
        jf["failing_step"] = fe.failure->failing_step;
        jf["action"] = fe.failure->action;
        jf["missing_concepts"] = std::vector<std::string>(fe.failure->candidates.begin(), fe.failure->candidates.end());
        jf["vocab_gap"] = fe.failure->vocab_gap;
      }
      if (!fe.certificate.empty()) {
        json cert = json::array();
        for (const auto& c : fe.certificate) cert.push_back(std::vector<std::string>(c.begin(), c.end()));
        jf["certificate"] = cert;
        jf["certificate_cost"] = cost_to_json(fe.certificate_cost);
      }
      out["foils"].push_back(jf);
    }
    return out;
  });
}

}  // namespace hap
