#pragma once

#include "hap/model.hpp"

#include <array>
#include <tuple>

namespace hap {

inline const std::string kInitStep = "INIT";
inline const std::string kGoalStep = "GOAL";

struct CausalLink {
  std::string producer;
  Fluent fluent;
  std::string consumer;

  auto operator<=>(const CausalLink&) const = default;
};

struct EmptyExpectedSet : std::invalid_argument {
  EmptyExpectedSet() : std::invalid_argument("expected plan set is empty") {}
};

// 1 - |a ∩ b| / |a ∪ b|, with 0 when both sets are empty.
template <class T>
Rational jaccard_distance(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) return Rational(0);
  long long inter = 0;
  for (const auto& x : a)
    if (b.count(x)) ++inter;
  long long uni = static_cast<long long>(a.size() + b.size()) - inter;
  return Rational(1) - Rational(inter, uni);
}

inline std::set<std::string> action_set(const Plan& p) { return {p.begin(), p.end()}; }

inline Rational action_distance(const Plan& p1, const Plan& p2) {
  return jaccard_distance(action_set(p1), action_set(p2));
}

// Causal links of an executable plan. The producer of a consumed fluent is the latest earlier step adding
// it, or INIT. With include_goal the goal fluents are consumed by GOAL and the plan must be valid.
inline std::set<CausalLink> causal_links(const PlanningModel& m, const Plan& plan, bool include_goal = true) {
  TaskState s = m.init;
  std::map<Fluent, std::string> last_adder;
  std::set<CausalLink> out;
  auto producer_of = [&](const Fluent& f) {
    auto it = last_adder.find(f);
    return it == last_adder.end() ? kInitStep : it->second;
  };
  for (size_t i = 0; i < plan.size(); ++i) {
    auto it = m.actions.find(plan[i]);
    if (it == m.actions.end()) throw InvalidPlan("unknown action '" + plan[i] + "'");
    const ActionDef& a = it->second;
    if (!satisfies(s, a.pre)) throw InvalidPlan("plan inexecutable at step " + std::to_string(i));
    for (const auto& f : a.pre) out.insert({producer_of(f), f, a.name});
    s = apply_effects(s, a);
    for (const auto& f : a.del) last_adder.erase(f);
    for (const auto& f : a.add) last_adder[f] = a.name;
  }
  if (include_goal) {
    if (!satisfies(s, m.goal)) throw InvalidPlan("plan does not reach the goal");
    for (const auto& f : m.goal) out.insert({producer_of(f), f, kGoalStep});
  }
  return out;
}

inline Rational causal_link_distance(const PlanningModel& m1, const Plan& p1, const PlanningModel& m2,
                                     const Plan& p2, bool include_goal = true) {
  return jaccard_distance(causal_links(m1, p1, include_goal), causal_links(m2, p2, include_goal));
}

inline Rational causal_link_distance(const PlanningModel& m, const Plan& p1, const Plan& p2) {
  return causal_link_distance(m, p1, m, p2);
}

// States visited after each step (s_1 .. s_n); throws InvalidPlan when a step is inapplicable.
inline std::vector<TaskState> state_trace(const PlanningModel& m, const Plan& plan) {
  std::vector<TaskState> out;
  TaskState s = m.init;
  for (size_t i = 0; i < plan.size(); ++i) {
    auto it = m.actions.find(plan[i]);
    if (it == m.actions.end()) throw InvalidPlan("unknown action '" + plan[i] + "'");
    if (!satisfies(s, it->second.pre)) throw InvalidPlan("plan inexecutable at step " + std::to_string(i));
    s = apply_effects(s, it->second);
    out.push_back(s);
  }
  return out;
}

inline Rational trace_distance(const std::vector<TaskState>& t1, const std::vector<TaskState>& t2) {
  const auto& a = t1.size() >= t2.size() ? t1 : t2;
  const auto& b = t1.size() >= t2.size() ? t2 : t1;
  if (a.empty()) return Rational(0);
  Rational sum(0);
  for (size_t k = 0; k < b.size(); ++k) sum += jaccard_distance(a[k], b[k]);
  sum += Rational(static_cast<long long>(a.size() - b.size()));
  return sum / Rational(static_cast<long long>(a.size()));
}

inline Rational state_seq_distance(const PlanningModel& m1, const Plan& p1, const PlanningModel& m2,
                                   const Plan& p2) {
  return trace_distance(state_trace(m1, p1), state_trace(m2, p2));
}

inline Rational state_seq_distance(const PlanningModel& m, const Plan& p1, const Plan& p2) {
  return state_seq_distance(m, p1, m, p2);
}

enum class DistanceKind { action, causal_link, state_sequence, composite, cost_difference };

inline std::string to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::action: return "action";
    case DistanceKind::causal_link: return "causal-link";
    case DistanceKind::state_sequence: return "state-sequence";
    case DistanceKind::composite: return "composite";
    case DistanceKind::cost_difference: return "cost-difference";
  }
  return "?";
}

inline DistanceKind distance_kind_from_string(const std::string& s) {
  for (auto k : {DistanceKind::action, DistanceKind::causal_link, DistanceKind::state_sequence,
                 DistanceKind::composite, DistanceKind::cost_difference})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown distance kind '" + s + "'");
}

struct DistanceSpec {
  DistanceKind kind = DistanceKind::composite;
  std::array<Rational, 3> weights{Rational(1, 3), Rational(1, 3), Rational(1, 3)};

  void check() const {
    if (kind != DistanceKind::composite) return;
    bool any = false;
    for (const auto& w : weights) {
      if (w < 0) throw std::invalid_argument("negative composite weight");
      if (w != 0) any = true;
    }
    if (!any) throw std::invalid_argument("composite weights are all zero");
  }

  static DistanceSpec cost_difference() { return {DistanceKind::cost_difference, {}}; }
  static DistanceSpec of(DistanceKind k) { return {k, {Rational(1, 3), Rational(1, 3), Rational(1, 3)}}; }
  static DistanceSpec composite(Rational wa, Rational wc, Rational ws) {
    return {DistanceKind::composite, {wa, wc, ws}};
  }
};

// The raw (action, causal-link, state-sequence) triple.
inline std::array<Rational, 3> distance_features(const PlanningModel& m1, const Plan& p1, const PlanningModel& m2,
                                                 const Plan& p2) {
  return {action_distance(p1, p2), causal_link_distance(m1, p1, m2, p2), state_seq_distance(m1, p1, m2, p2)};
}

// Distance between p1 (evaluated in m1) and p2 (evaluated in m2). Only cost-difference can be infinite.
inline Cost plan_distance(const PlanningModel& m1, const Plan& p1, const PlanningModel& m2, const Plan& p2,
                          const DistanceSpec& spec) {
  spec.check();
  switch (spec.kind) {
    case DistanceKind::action: return Cost(action_distance(p1, p2));
    case DistanceKind::causal_link: return Cost(causal_link_distance(m1, p1, m2, p2));
    case DistanceKind::state_sequence: return Cost(state_seq_distance(m1, p1, m2, p2));
    case DistanceKind::cost_difference: return abs_difference(plan_cost(m1, p1), plan_cost(m2, p2));
    case DistanceKind::composite: {
      Rational d(0);
      if (spec.weights[0] != 0) d += spec.weights[0] * action_distance(p1, p2);
      if (spec.weights[1] != 0) d += spec.weights[1] * causal_link_distance(m1, p1, m2, p2);
      if (spec.weights[2] != 0) d += spec.weights[2] * state_seq_distance(m1, p1, m2, p2);
      return Cost(d);
    }
  }
  return Cost::infinity();
}

inline Cost composite_distance(const PlanningModel& m, const Plan& p1, const Plan& p2, const DistanceSpec& spec) {
  return plan_distance(m, p1, m, p2, spec);
}

struct NearestPlan {
  Cost distance;
  Plan witness;
};

// Minimum distance from p (in model_p) to the expected plans (in model_e); ties go to the lexicographically
// least witness.
inline NearestPlan min_distance_to_set(const PlanningModel& model_p, const Plan& p, const PlanningModel& model_e,
                                       const std::vector<Plan>& expected, const DistanceSpec& spec) {
  if (expected.empty()) throw EmptyExpectedSet();
  std::optional<NearestPlan> best;
  for (const auto& e : expected) {
    Cost d = plan_distance(model_p, p, model_e, e, spec);
    if (!best || d < best->distance || (d == best->distance && e < best->witness)) best = NearestPlan{d, e};
  }
  return *best;
}

inline NearestPlan min_distance_to_set(const PlanningModel& m, const Plan& p, const std::vector<Plan>& expected,
                                       const DistanceSpec& spec) {
  return min_distance_to_set(m, p, m, expected, spec);
}

// Distance between an executable prefix and an equal-length prefix of another plan. Causal links exclude
// GOAL and state traces cover the prefix only.
inline Cost prefix_distance(const PlanningModel& m1, const Plan& prefix, const PlanningModel& m2, const Plan& other,
                            const DistanceSpec& spec) {
  Plan cut(other.begin(), other.begin() + static_cast<long>(std::min(prefix.size(), other.size())));
  switch (spec.kind) {
    case DistanceKind::action: return Cost(action_distance(prefix, cut));
    case DistanceKind::causal_link:
      return Cost(causal_link_distance(m1, prefix, m2, cut, false));
    case DistanceKind::state_sequence:
      return Cost(trace_distance(state_trace(m1, prefix), state_trace(m2, cut)));
    case DistanceKind::cost_difference: {
      Rational c1(0), c2(0);
      for (const auto& a : prefix) c1 += m1.action(a).cost;
      for (const auto& a : cut) c2 += m2.action(a).cost;
      Rational d = c1 - c2;
      return Cost(d < 0 ? -d : d);
    }
    case DistanceKind::composite: {
      Rational d(0);
      if (spec.weights[0] != 0) d += spec.weights[0] * action_distance(prefix, cut);
      if (spec.weights[1] != 0) d += spec.weights[1] * causal_link_distance(m1, prefix, m2, cut, false);
      if (spec.weights[2] != 0) d += spec.weights[2] * trace_distance(state_trace(m1, prefix), state_trace(m2, cut));
      return Cost(d);
    }
  }
  return Cost::infinity();
}

}  // namespace hap
