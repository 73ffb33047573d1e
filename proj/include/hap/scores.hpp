#pragma once

#include "hap/distance.hpp"
#include "hap/planner.hpp"

namespace hap {

struct NoConsistentModel : std::runtime_error {
  NoConsistentModel() : std::runtime_error("no hypothesis model is consistent with the plan") {}
};
struct PrefixInexecutable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoCompletion : std::runtime_error {
  NoCompletion() : std::runtime_error("prefix has no goal-achieving completion within the bound") {}
};
struct DeadEnd : std::runtime_error {
  DeadEnd() : std::runtime_error("no action keeps the goal reachable") {}
};

enum class ScoreKind { explicability, legibility, predictability };

inline std::string to_string(ScoreKind k) {
  switch (k) {
    case ScoreKind::explicability: return "explicability";
    case ScoreKind::legibility: return "legibility";
    case ScoreKind::predictability: return "predictability";
  }
  return "?";
}

struct ScoreReport {
  ScoreKind kind = ScoreKind::explicability;
  std::optional<Rational> value;  // empty means minus infinity (explicability of a plan at infinite distance)
  Cost ie{0};
  std::vector<Plan> witnesses;
  std::vector<size_t> consistent_models;
  size_t completions = 0;
  bool truncated = false;
};

// IE is the minimum distance to an optimal mental-model plan and E = -IE. For cost-difference the plan is
// costed in the mental model; other kinds read the plan in `source` (the robot model when the plan may be
// inexecutable in the mental model).
inline ScoreReport explicability(const Plan& plan, const PlanningModel& mental, const DistanceSpec& spec, size_t cap,
                                 const PlanningModel* source = nullptr, const SearchOptions& opt = {}) {
  PlanSet expected = enumerate_optimal(mental, cap, opt);
  const PlanningModel& pm = spec.kind == DistanceKind::cost_difference || !source ? mental : *source;
  NearestPlan near = min_distance_to_set(pm, plan, mental, expected.plans, spec);
  ScoreReport r;
  r.kind = ScoreKind::explicability;
  r.ie = near.distance;
  if (near.distance.finite()) r.value = -near.distance.value();
  r.witnesses = {near.witness};
  r.truncated = expected.truncated;
  return r;
}

struct ModelHypothesisSet {
  std::vector<PlanningModel> models;
  std::vector<Rational> weights;  // optional prior, empty for the cardinality instantiation

  void check() const {
    if (models.empty()) throw std::invalid_argument("hypothesis set is empty");
    if (!weights.empty()) {
      if (weights.size() != models.size()) throw std::invalid_argument("weight count mismatch");
      Rational s(0);
      for (const auto& w : weights) {
        if (w < 0) throw std::invalid_argument("negative prior weight");
        s += w;
      }
      if (s != 1) throw std::invalid_argument("prior weights must sum to 1");
    }
  }
};

// 1 / |consistent models|; with priors, the posterior mass of the most likely consistent model.
inline ScoreReport legibility(const Plan& plan, const ModelHypothesisSet& hyp) {
  hyp.check();
  ScoreReport r;
  r.kind = ScoreKind::legibility;
  Rational mass(0), top(0);
  for (size_t j = 0; j < hyp.models.size(); ++j) {
    if (plan_cost(hyp.models[j], plan).is_inf()) continue;
    if (!hyp.weights.empty() && hyp.weights[j] == 0) continue;
    r.consistent_models.push_back(j);
    if (!hyp.weights.empty()) {
      mass += hyp.weights[j];
      top = std::max(top, hyp.weights[j]);
    }
  }
  if (r.consistent_models.empty()) throw NoConsistentModel();
  if (hyp.weights.empty())
    r.value = Rational(1, static_cast<long long>(r.consistent_models.size()));
  else
    r.value = top / mass;
  return r;
}

inline ScoreReport predictability(const Plan& prefix, const PlanningModel& mental, const Rational& cost_bound,
                                  size_t cap, const SearchOptions& opt = {}) {
  if (!executable(mental, prefix)) throw PrefixInexecutable("prefix is not executable in the mental model");
  PlanSet comp;
  try {
    comp = enumerate_completions(mental, prefix, cost_bound, cap, opt);
  } catch (const InvalidPlan& e) {
    throw PrefixInexecutable(e.what());
  }
  if (comp.plans.empty()) throw NoCompletion();
  ScoreReport r;
  r.kind = ScoreKind::predictability;
  r.completions = comp.plans.size();
  r.value = Rational(1, static_cast<long long>(comp.plans.size()));
  r.witnesses = comp.plans;
  r.truncated = comp.truncated;
  return r;
}

// The robot-executable next action whose extended prefix is most predictable in the mental model.
inline std::string predictable_next_action(const Plan& prefix, const PlanningModel& robot, const PlanningModel& mental,
                                           const Rational& cost_bound, size_t cap, const SearchOptions& opt = {}) {
  if (!executable(robot, prefix)) throw PrefixInexecutable("prefix is not executable in the robot model");
  std::optional<std::pair<Rational, std::string>> best;
  for (const auto& [name, _] : robot.actions) {
    Plan p = prefix;
    p.push_back(name);
    if (!executable(robot, p) || !executable(mental, p)) continue;
    ScoreReport r;
    try {
      r = predictability(p, mental, cost_bound, cap, opt);
    } catch (const NoCompletion&) {
      continue;
    } catch (const PrefixInexecutable&) {
      continue;
    }
    if (!best || *r.value > best->first) best = std::make_pair(*r.value, name);
  }
  if (!best) throw DeadEnd();
  return best->second;
}

}  // namespace hap
