#pragma once

#include "support/oracles.hpp"

namespace oracle {

struct UncertainInstance {
  PlanningModel robot;
  hap::AnnotatedModel human;
  Plan plan;
};

// Robot model, a perturbed known model and up to `max_annotations` annotated features drawn from the universe.
inline std::optional<UncertainInstance> random_uncertain(Rng& rng, size_t max_annotations, size_t known_changes = 2) {
  UncertainInstance in;
  in.robot = random_model(rng);
  in.plan = hap::optimal_plan(in.robot).plan;
  in.human.known = perturb(rng, in.robot, known_changes, false);
  auto uni = feature_universe(in.robot);
  std::set<std::string> used;
  size_t k = 1 + pick(rng, max_annotations);
  for (size_t tries = 0; in.human.possible.size() < k && tries < 100; ++tries) {
    const Feature& f = uni[pick(rng, uni.size())];
    if (f.kind == FeatureKind::goal || f.kind == FeatureKind::cost) continue;
    if (!used.insert(f.key()).second) continue;
    if (f.kind == FeatureKind::add && has_feature(in.human.known, Feature::del(f.action, f.fluent))) continue;
    if (f.kind == FeatureKind::del && has_feature(in.human.known, Feature::add(f.action, f.fluent))) continue;
    apply(in.human.known, f, false);
    hap::Annotation a;
    a.slot = f.kind == FeatureKind::pre   ? hap::Slot::pre
             : f.kind == FeatureKind::add ? hap::Slot::add
             : f.kind == FeatureKind::del ? hap::Slot::del
                                          : hap::Slot::init;
    a.action = f.action;
    a.fluent = f.fluent;
    a.prob = Rational(1 + static_cast<long long>(pick(rng, 3)), 4);
    in.human.possible.push_back(a);
  }
  for (auto& [_, act] : in.human.known.actions)
    for (const auto& f : act.add) act.del.erase(f);
  in.human.check();
  return in;
}

// Observer who knows the randomized decoy procedure: it enumerates every (goal subset, decoy) pair, keeps those
// whose decoy run reproduces the observed tokens and whose tokens admit a plan to the candidate goal, and
// guesses the candidate goal with the most supporting pairs (ties broken at random).
class DecoyAttacker {
 public:
  DecoyAttacker(const hap::COPPProblem& prob, size_t k) : prob_(prob), k_(k) {
    hap::for_each_combination(prob.goals.size(), k, [&](const std::vector<size_t>& subset) {
      for (size_t d : subset) {
        try {
          runs_.push_back({subset, hap::secure_run(prob_, subset, d).tokens});
        } catch (const hap::NoObjectivePlan&) {
        }
      }
      return false;
    });
  }

  size_t guess(const std::vector<hap::ObservationToken>& tokens, Rng& rng) const {
    std::vector<size_t> support(prob_.goals.size(), 0);
    for (const auto& [subset, t] : runs_) {
      if (t != tokens) continue;
      for (size_t g : subset)
        if (reachable(g, tokens)) ++support[g];
    }
    size_t best = *std::max_element(support.begin(), support.end());
    std::vector<size_t> ties;
    for (size_t g = 0; g < support.size(); ++g)
      if (support[g] == best) ties.push_back(g);
    return ties[pick(rng, ties.size())];
  }

 private:
  bool reachable(size_t g, const std::vector<hap::ObservationToken>& tokens) const {
    auto finals = consistent_finals(prob_.robot, prob_.sensor, tokens);
    auto in = goals_in(finals, {prob_.goals[g]});
    return !in.empty();
  }

  hap::COPPProblem prob_;
  size_t k_;
  std::vector<std::pair<std::vector<size_t>, std::vector<hap::ObservationToken>>> runs_;
};

struct FoilInstance {
  PlanningModel model;
  Plan foil;
  TaskState at_fail;
  std::set<Fluent> unmet;
};

// A random model and a foil whose last action is inapplicable after a random executable prefix.
inline FoilInstance random_foil(Rng& rng, size_t prefix = 3) {
  ModelShape sh;
  sh.actions = 6;
  while (true) {
    FoilInstance in;
    in.model = random_model(rng, sh);
    TaskState s = in.model.init;
    for (size_t k = 0; k < prefix; ++k) {
      std::vector<std::string> ok;
      for (const auto& [a, _] : in.model.actions)
        if (step(in.model, s, a)) ok.push_back(a);
      if (ok.empty()) break;
      const auto& a = ok[pick(rng, ok.size())];
      in.foil.push_back(a);
      s = *step(in.model, s, a);
    }
    std::vector<std::string> bad;
    for (const auto& [a, _] : in.model.actions)
      if (!step(in.model, s, a)) bad.push_back(a);
    if (bad.empty()) continue;
    const auto& a = bad[pick(rng, bad.size())];
    in.foil.push_back(a);
    in.at_fail = s;
    for (const auto& f : in.model.action(a).pre)
      if (!s.count(f)) in.unmet.insert(f);
    return in;
  }
}

inline std::set<TaskState> reachable_states(const PlanningModel& m) {
  std::set<TaskState> seen{m.init};
  std::vector<TaskState> stack{m.init};
  while (!stack.empty()) {
    TaskState s = stack.back();
    stack.pop_back();
    for (const auto& [a, _] : m.actions)
      if (auto n = step(m, s, a); n && seen.insert(*n).second) stack.push_back(*n);
  }
  return seen;
}

// Fluents absent where the foil fails that hold in every reachable state executing the failing action.
inline std::set<Fluent> observable_missing(const FoilInstance& in) {
  std::set<Fluent> out;
  for (const auto& f : in.model.fluents)
    if (!in.at_fail.count(f)) out.insert(f);
  for (const auto& s : reachable_states(in.model)) {
    if (!step(in.model, s, in.foil.back())) continue;
    for (auto it = out.begin(); it != out.end();) it = s.count(*it) ? std::next(it) : out.erase(it);
  }
  return out;
}

// ---- shared generators ----

struct MrpPair {
  hap::MRP mrp;
  std::vector<Edit> delta;
};

// A robot model, an optimal plan and a mental model differing in at most `max_delta` features.
inline std::optional<MrpPair> random_mrp_pair(Rng& rng, size_t max_delta) {
  ModelShape sh;
  sh.fluents = 4 + pick(rng, 3);
  auto robot = random_model(rng, sh);
  auto mental = perturb(rng, robot, 1 + pick(rng, max_delta - 1), true);
  auto delta = difference(mental, robot);
  if (delta.empty() || delta.size() > max_delta) return std::nullopt;
  auto plan = hap::optimal_plan(robot).plan;
  return MrpPair{hap::make_mrp(plan, robot, mental), delta};
}

inline std::vector<size_t> minimal_masks(const ExplanationOracle& o, size_t size) {
  std::vector<size_t> out;
  for (size_t m = 0; m < o.ok.size(); ++m)
    if (o.ok[m] && static_cast<size_t>(__builtin_popcountll(m)) == size) out.push_back(m);
  return out;
}

inline void all_plans(const PlanningModel& m, const TaskState& s, const Rational& g, const Rational& bound, Plan& path,
                      std::vector<Plan>& out) {
  if (goal_holds(m, s)) out.push_back(path);
  for (const auto& [name, a] : m.actions) {
    if (g + a.cost > bound) continue;
    auto n = step(m, s, name);
    if (!n) continue;
    path.push_back(name);
    all_plans(m, *n, g + a.cost, bound, path, out);
    path.pop_back();
  }
}

// Every action sequence valid in m with cost at most `bound`.
inline std::vector<Plan> all_plans(const PlanningModel& m, const Rational& bound) {
  std::vector<Plan> out;
  Plan path;
  all_plans(m, m.init, 0, bound, path, out);
  return out;
}

inline std::vector<Edit> subset(const std::vector<Edit>& delta, size_t mask) {
  std::vector<Edit> out;
  for (size_t i = 0; i < delta.size(); ++i)
    if (mask >> i & 1u) out.push_back(delta[i]);
  return out;
}

struct ModelPair {
  PlanningModel robot, mental;
  std::vector<Edit> delta;
};

// Small robot and mental models over the same vocabulary, without cost differences.
inline std::optional<ModelPair> random_model_pair(Rng& rng, size_t max_delta) {
  ModelShape sh;
  sh.fluents = 4;
  sh.actions = 4;
  ModelPair in;
  in.robot = random_model(rng, sh);
  in.mental = perturb(rng, in.robot, 1 + pick(rng, max_delta), false);
  in.mental.fluents = in.robot.fluents;
  in.delta = difference(in.mental, in.robot);
  if (in.delta.empty() || in.delta.size() > max_delta) return std::nullopt;
  return in;
}

// Packages from random sources; X sees only load and deliver, C also sees the load source.
inline hap::MOCOPPProblem random_delivery(Rng& rng) {
  hap::MOCOPPProblem p;
  size_t pkgs = 3 + pick(rng, 2), sources = 2 + pick(rng, 2);
  std::map<std::string, hap::ObservationToken> tx, tc;
  std::vector<std::string> names;
  for (size_t i = 0; i < pkgs; ++i) {
    std::string k = "p" + std::to_string(i);
    std::string src = "s" + std::to_string(pick(rng, sources));
    names.push_back(k);
    p.robot.add_action(hap::fixtures::action("load_" + k, {"waiting_" + k}, {"loaded_" + k}, {"waiting_" + k}));
    p.robot.add_action(hap::fixtures::action("deliver_" + k, {"loaded_" + k}, {"delivered_" + k}, {"loaded_" + k}));
    p.robot.init.insert("waiting_" + k);
    tx["load_" + k] = "load";
    tx["deliver_" + k] = "deliver";
    tc["load_" + k] = "load-" + src;
    tc["deliver_" + k] = "deliver";
  }
  for (size_t i = 0; i < pkgs; ++i)
    for (size_t j = i + 1; j < pkgs; ++j) p.goals.push_back({"delivered_" + names[i], "delivered_" + names[j]});
  p.true_goal = pick(rng, p.goals.size());
  p.robot.goal = p.goals[p.true_goal];
  p.sensor_x = hap::SensorModel::table(tx);
  p.sensor_c = hap::SensorModel::table(tc);
  return p;
}

inline std::vector<size_t> observed_goals(const hap::COPPProblem& p, const std::vector<hap::ObservationToken>& tokens) {
  return goals_in(consistent_finals(p.robot, p.sensor, tokens), p.goals);
}

inline bool reaches(const hap::COPPProblem& p, const Plan& plan, size_t g) {
  PlanningModel m = p.robot;
  m.goal = p.goals[g];
  return cost_of(m, plan).has_value();
}

struct ScoreInstance {
  PlanningModel robot, mental;
  std::vector<Plan> candidates;
};

// A robot model, a solvable perturbed mental model and at least two robot plans within optimum + 2.
inline std::optional<ScoreInstance> random_score_instance(Rng& rng) {
  ScoreInstance in;
  in.robot = random_model(rng);
  in.mental = perturb(rng, in.robot, 1 + pick(rng, 3), false);
  if (!optimum(in.mental)) return std::nullopt;
  auto o = *optimum(in.robot);
  in.candidates = hap::enumerate_valid_bounded(in.robot, o + 2, 8).plans;
  if (in.candidates.size() < 2) return std::nullopt;
  return in;
}

}  // namespace oracle
