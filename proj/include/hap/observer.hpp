#pragma once

#include "hap/distance.hpp"
#include "hap/planner.hpp"

#include <functional>
#include <queue>
#include <random>
#include <unordered_set>

namespace hap {

struct NoObjectivePlan : std::runtime_error {
  NoObjectivePlan() : std::runtime_error("no plan satisfies the observer objective") {}
};

using ObservationToken = std::string;

// Deterministic observation function O(action, next state).
struct SensorModel {
  std::function<ObservationToken(const std::string& action, const TaskState& next)> observe;

  // Token = table[action] (the action name when absent), followed by the projected fluents true in the
  // next state when `projected` is non-empty.
  static SensorModel table(std::map<std::string, ObservationToken> tokens, std::set<Fluent> projected = {}) {
    SensorModel s;
    s.observe = [tokens = std::move(tokens), projected = std::move(projected)](const std::string& a,
                                                                                const TaskState& next) {
      auto it = tokens.find(a);
      ObservationToken t = it == tokens.end() ? a : it->second;
      if (!projected.empty()) {
        t += "|";
        bool first = true;
        for (const auto& f : next) {
          if (!projected.count(f)) continue;
          if (!first) t += ",";
          t += f;
          first = false;
        }
      }
      return t;
    };
    return s;
  }

  static SensorModel identity() {
    SensorModel s;
    s.observe = [](const std::string& a, const TaskState& next) {
      std::string t = a + "|";
      for (const auto& f : next) t += f + ",";
      return t;
    };
    return s;
  }
};

using Belief = std::set<TaskState>;

inline Belief belief_update(const PlanningModel& m, const Belief& b, const ObservationToken& token,
                            const SensorModel& sensor) {
  Belief out;
  for (const auto& s : b)
    for (const auto& [name, a] : m.actions) {
      if (!satisfies(s, a.pre)) continue;
      TaskState next = apply_effects(s, a);
      if (sensor.observe(name, next) == token) out.insert(std::move(next));
    }
  return out;
}

inline std::vector<ObservationToken> observe_plan(const PlanningModel& m, const Plan& plan, const SensorModel& sensor) {
  std::vector<ObservationToken> out;
  TaskState s = m.init;
  for (const auto& a : plan) {
    auto next = progress(m, s, a);
    if (!next) throw InvalidPlan("plan inexecutable at '" + a + "'");
    s = std::move(*next);
    out.push_back(sensor.observe(a, s));
  }
  return out;
}

inline Belief final_belief(const PlanningModel& m, const std::vector<ObservationToken>& tokens, const SensorModel& sensor,
                           Belief b0 = {}) {
  if (b0.empty()) b0 = {m.init};
  for (const auto& t : tokens) b0 = belief_update(m, b0, t, sensor);
  return b0;
}

// Indices of goals satisfied by some state of the belief.
inline std::vector<size_t> goals_in_belief(const Belief& b, const std::vector<std::set<Fluent>>& goals) {
  std::vector<size_t> out;
  for (size_t i = 0; i < goals.size(); ++i)
    for (const auto& s : b)
      if (satisfies(s, goals[i])) {
        out.push_back(i);
        break;
      }
  return out;
}

// Action sequences producing the same tokens as the plan from the initial state and ending in a goal state
// (goal defaults to the model goal), in lexicographic order.
inline PlanSet token_consistent_plans(const PlanningModel& m, const std::vector<ObservationToken>& tokens,
                                      const SensorModel& sensor, const std::set<Fluent>& goal, size_t cap,
                                      bool require_goal = true) {
  PlanSet out;
  Plan cur;
  std::function<bool(const TaskState&, size_t)> dfs = [&](const TaskState& s, size_t i) {
    if (i == tokens.size()) {
      if (require_goal && !satisfies(s, goal)) return true;
      out.plans.push_back(cur);
      if (out.plans.size() >= cap) {
        out.truncated = true;
        return false;
      }
      return true;
    }
    for (const auto& [name, a] : m.actions) {
      if (!satisfies(s, a.pre)) continue;
      TaskState next = apply_effects(s, a);
      if (sensor.observe(name, next) != tokens[i]) continue;
      cur.push_back(name);
      bool go = dfs(next, i + 1);
      cur.pop_back();
      if (!go) return false;
    }
    return true;
  };
  dfs(m.init, 0);
  return out;
}

inline PlanSet belief_plan_set(const PlanningModel& m, const Plan& plan, const SensorModel& sensor, size_t cap) {
  if (plan_cost(m, plan).is_inf()) throw InvalidPlan("plan is not valid");
  return token_consistent_plans(m, observe_plan(m, plan, sensor), sensor, m.goal, cap);
}

inline Rational max_pairwise_distance(const PlanningModel& m, const std::vector<Plan>& ps, const DistanceSpec& spec) {
  Rational best(0);
  for (size_t i = 0; i < ps.size(); ++i)
    for (size_t j = i + 1; j < ps.size(); ++j) {
      Cost d = composite_distance(m, ps[i], ps[j], spec);
      if (d.finite() && d.value() > best) best = d.value();
    }
  return best;
}

inline Rational min_pairwise_distance(const PlanningModel& m, const std::vector<Plan>& ps, const DistanceSpec& spec) {
  std::optional<Rational> best;
  for (size_t i = 0; i < ps.size(); ++i)
    for (size_t j = i + 1; j < ps.size(); ++j) {
      Cost d = composite_distance(m, ps[i], ps[j], spec);
      if (d.finite() && (!best || d.value() < *best)) best = d.value();
    }
  return best.value_or(Rational(0));
}

struct COPPProblem {
  PlanningModel robot;  // its goal is ignored; goals[true_goal] is the robot's goal
  std::vector<std::set<Fluent>> goals;
  size_t true_goal = 0;
  SensorModel sensor;
  Belief init_belief;  // empty means {I}
};

enum class ObjectiveKind { j_legible, k_ambiguous, m_similar, l_diverse };

inline std::string to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::j_legible: return "j-legible";
    case ObjectiveKind::k_ambiguous: return "k-ambiguous";
    case ObjectiveKind::m_similar: return "m-similar";
    case ObjectiveKind::l_diverse: return "l-diverse";
  }
  return "?";
}

inline ObjectiveKind objective_kind_from_string(const std::string& s) {
  for (auto k : {ObjectiveKind::j_legible, ObjectiveKind::k_ambiguous, ObjectiveKind::m_similar, ObjectiveKind::l_diverse})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown objective kind '" + s + "'");
}

struct COPPObjective {
  ObjectiveKind kind = ObjectiveKind::k_ambiguous;
  size_t j = 1, k = 2, m = 2, l = 2;
  Rational d{0};
  DistanceSpec spec = DistanceSpec::of(DistanceKind::action);
  std::optional<Rational> cost_bound;
  bool fallback = false;       // k-ambiguous: lower k until a plan is found
  std::vector<size_t> required_goals;  // goals that must all appear in the final belief
  size_t bps_cap = 64;
  size_t initial_delta = 1;
  size_t node_budget = 200000;

  void check(size_t n) const {
    if (kind == ObjectiveKind::j_legible && (j < 1 || j > n)) throw std::invalid_argument("j out of range");
    if (kind == ObjectiveKind::k_ambiguous && (k < 1 || k > n)) throw std::invalid_argument("k out of range");
    if (kind == ObjectiveKind::m_similar && m < 2) throw std::invalid_argument("m must be at least 2");
    if (kind == ObjectiveKind::l_diverse && l < 2) throw std::invalid_argument("l must be at least 2");
    if (d < 0) throw std::invalid_argument("d must be non-negative");
  }
};

struct COPPResult {
  Plan plan;
  std::vector<ObservationToken> tokens;
  std::vector<size_t> goals_in_final_belief;
  size_t delta = 0;
  size_t expanded = 0;
  size_t k_used = 0;
};

namespace detail {

struct BeliefTask {
  Task t;
  std::vector<Bits> goal_bits;
  std::vector<std::vector<int>> goal_lists;
  mutable std::unordered_map<Bits, std::vector<double>, BitsHash> h_cache;

  BeliefTask(const PlanningModel& m, const std::vector<std::set<Fluent>>& goals) {
    PlanningModel mm = m;
    for (const auto& g : goals) mm.fluents.insert(g.begin(), g.end());
    t = compile(mm);
    for (const auto& g : goals) {
      goal_bits.push_back(t.to_bits(g));
      std::vector<int> gl;
      for (auto i : goal_bits.back().indices()) gl.push_back(static_cast<int>(i));
      goal_lists.push_back(gl);
    }
  }

  // h_max from s to every goal, as doubles (large for unreachable)
  const std::vector<double>& goal_h(const Bits& s) const {
    auto it = h_cache.find(s);
    if (it != h_cache.end()) return it->second;
    std::vector<double> out;
    for (const auto& gl : goal_lists) {
      Cost c = hmax(t, s, gl);
      out.push_back(c.is_inf() ? 1e9 : c.to_double());
    }
    return h_cache.emplace(s, std::move(out)).first->second;
  }

  std::vector<size_t> goals_in(const std::set<Bits>& b) const {
    std::vector<size_t> out;
    for (size_t g = 0; g < goal_bits.size(); ++g)
      for (const auto& s : b)
        if (s.contains(goal_bits[g])) {
          out.push_back(g);
          break;
        }
    return out;
  }

  // Max over the m nearest (or farthest) other goals of the belief's nearest-state h_max.
  double h_goals(const std::set<Bits>& b, size_t true_goal, size_t m, bool farthest) const {
    if (m == 0) return 0;
    std::vector<double> dist;
    for (size_t g = 0; g < goal_bits.size(); ++g) {
      if (g == true_goal) continue;
      double best = 1e9;
      for (const auto& s : b) best = std::min(best, goal_h(s)[g]);
      dist.push_back(best);
    }
    std::sort(dist.begin(), dist.end());
    if (farthest) std::reverse(dist.begin(), dist.end());
    double h = 0;
    for (size_t i = 0; i < std::min(m, dist.size()); ++i) h = std::max(h, dist[i]);
    return h;
  }
};

// Belief tracker for one observer over the compiled task.
struct Observer {
  const BeliefTask* bt;
  const SensorModel* sensor;
  mutable std::unordered_map<Bits, std::vector<ObservationToken>, BitsHash> cache;

  // token emitted by each op from s ("" when inapplicable)
  const std::vector<ObservationToken>& tokens(const Bits& s) const {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    std::vector<ObservationToken> out(bt->t.ops.size());
    for (size_t i = 0; i < bt->t.ops.size(); ++i) {
      if (!s.contains(bt->t.ops[i].pre)) continue;
      Bits n = bt->t.apply(s, bt->t.ops[i]);
      out[i] = sensor->observe(bt->t.ops[i].name, bt->t.to_state(n));
    }
    return cache.emplace(s, std::move(out)).first->second;
  }

  std::set<Bits> update(const std::set<Bits>& b, const ObservationToken& tok) const {
    std::set<Bits> out;
    for (const auto& s : b) {
      const auto& tk = tokens(s);
      for (size_t i = 0; i < tk.size(); ++i)
        if (!tk[i].empty() && tk[i] == tok) out.insert(bt->t.apply(s, bt->t.ops[i]));
    }
    return out;
  }

  std::set<Bits> initial(const Belief& b0) const {
    std::set<Bits> out;
    if (b0.empty()) {
      out.insert(bt->t.init);
    } else {
      for (const auto& s : b0) out.insert(bt->t.to_bits(s));
    }
    return out;
  }
};

struct BeliefNode {
  Bits s;
  std::vector<std::set<Bits>> beliefs;  // one per observer
  Rational g;
  std::vector<int> ops;
  std::vector<std::vector<ObservationToken>> tokens;  // one sequence per observer
};

struct BeliefKey {
  Bits s;
  std::vector<std::vector<Bits>> beliefs;
  bool operator==(const BeliefKey&) const = default;
};

struct BeliefKeyHash {
  size_t operator()(const BeliefKey& k) const {
    size_t h = k.s.hash();
    for (const auto& b : k.beliefs) {
      h = h * 1315423911u + b.size();
      for (const auto& x : b) h = h * 2654435761u ^ x.hash();
    }
    return h;
  }
};

struct SearchLimits {
  std::optional<Rational> cost_bound;
  size_t initial_delta = 1;
  size_t node_budget = 200000;
};

// Delta-bounded GBFS over (state, beliefs) nodes. Nodes whose largest belief exceeds the current delta are
// deferred; when the open list empties, delta grows to the smallest deferred belief size.
template <class Goal, class Heur>
std::optional<std::pair<BeliefNode, size_t>> delta_search(const BeliefTask& bt, const Bits& goal_bits,
                                                          const std::vector<const Observer*>& observers,
                                                          const std::vector<std::set<Bits>>& b0,
                                                          const SearchLimits& lim, const Goal& goal_test,
                                                          const Heur& heur, size_t& expanded) {
  struct Entry {
    double h;
    Rational g;
    size_t order;
    std::shared_ptr<BeliefNode> n;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.h != b.h) return a.h > b.h;
    if (a.g != b.g) return a.g > b.g;
    return a.order > b.order;
  };
  auto largest = [](const BeliefNode& n) {
    size_t m = 0;
    for (const auto& b : n.beliefs) m = std::max(m, b.size());
    return m;
  };
  size_t delta = std::max<size_t>(lim.initial_delta, 1);
  auto root = std::make_shared<BeliefNode>(
      BeliefNode{bt.t.init, b0, Rational(0), {}, std::vector<std::vector<ObservationToken>>(observers.size())});
  std::vector<std::shared_ptr<BeliefNode>> pending{root};
  std::unordered_set<BeliefKey, BeliefKeyHash> closed;
  size_t order = 0;
  while (!pending.empty()) {
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
    for (auto& n : pending) open.push({heur(*n), n->g, order++, n});
    pending.clear();
    while (!open.empty()) {
      Entry e = open.top();
      open.pop();
      const BeliefNode& n = *e.n;
      if (largest(n) > delta) {
        pending.push_back(e.n);
        continue;
      }
      BeliefKey key{n.s, {}};
      for (const auto& b : n.beliefs) key.beliefs.emplace_back(b.begin(), b.end());
      if (!closed.insert(std::move(key)).second) continue;
      if (n.s.contains(goal_bits) && goal_test(n)) return std::make_pair(n, delta);
      if (++expanded > lim.node_budget) throw ResourceLimit("observer search budget exhausted");
      for (size_t i = 0; i < bt.t.ops.size(); ++i) {
        const auto& op = bt.t.ops[i];
        if (!n.s.contains(op.pre)) continue;
        Rational g2 = n.g + op.cost;
        if (lim.cost_bound && g2 > *lim.cost_bound) continue;
        auto c = std::make_shared<BeliefNode>(BeliefNode{bt.t.apply(n.s, op), {}, g2, n.ops, n.tokens});
        c->ops.push_back(static_cast<int>(i));
        for (size_t o = 0; o < observers.size(); ++o) {
          const ObservationToken& tok = observers[o]->tokens(n.s)[i];
          c->tokens[o].push_back(tok);
          c->beliefs.push_back(observers[o]->update(n.beliefs[o], tok));
        }
        open.push({heur(*c), g2, order++, c});
      }
    }
    if (pending.empty()) break;
    size_t next = SIZE_MAX;
    for (const auto& n : pending) next = std::min(next, largest(*n));
    delta = std::max(delta + 1, next);
  }
  return std::nullopt;
}

inline PlanningModel goal_model(const PlanningModel& robot, const std::vector<std::set<Fluent>>& goals, size_t g) {
  PlanningModel m = robot;
  for (const auto& x : goals) m.fluents.insert(x.begin(), x.end());
  m.goal = goals[g];
  return m;
}

inline bool contains_all(const std::vector<size_t>& in, const std::vector<size_t>& req) {
  for (auto r : req)
    if (std::find(in.begin(), in.end(), r) == in.end()) return false;
  return true;
}

}  // namespace detail

// Plan for goals[true_goal] whose final belief meets the objective's goal test.
inline COPPResult copp_search(const COPPProblem& prob, COPPObjective obj) {
  const size_t n = prob.goals.size();
  if (prob.true_goal >= n) throw std::invalid_argument("true goal index out of range");
  obj.check(n);
  detail::BeliefTask bt(prob.robot, prob.goals);
  detail::Observer ob{&bt, &prob.sensor, {}};
  std::vector<std::set<Bits>> b0{ob.initial(prob.init_belief)};
  PlanningModel gm = detail::goal_model(prob.robot, prob.goals, prob.true_goal);
  const size_t tg = prob.true_goal;

  auto prefix_bps = [&](const detail::BeliefNode& node, size_t cap) {
    return token_consistent_plans(gm, node.tokens[0], prob.sensor, gm.goal, cap, false).plans;
  };

  auto run = [&](const COPPObjective& o) -> std::optional<COPPResult> {
    auto goal_test = [&](const detail::BeliefNode& node) {
      auto in = bt.goals_in(node.beliefs[0]);
      if (!detail::contains_all(in, o.required_goals)) return false;
      switch (o.kind) {
        case ObjectiveKind::j_legible: return in.size() <= o.j;
        case ObjectiveKind::k_ambiguous: return in.size() >= o.k;
        case ObjectiveKind::m_similar:
        case ObjectiveKind::l_diverse: {
          auto bps = token_consistent_plans(gm, node.tokens[0], prob.sensor, gm.goal, o.bps_cap);
          if (o.kind == ObjectiveKind::m_similar)
            return bps.plans.size() >= o.m && max_pairwise_distance(gm, bps.plans, o.spec) <= o.d;
          return bps.plans.size() >= o.l && min_pairwise_distance(gm, bps.plans, o.spec) >= o.d;
        }
      }
      return false;
    };
    auto heur = [&](const detail::BeliefNode& node) {
      const auto& b = node.beliefs[0];
      double hga = bt.goal_h(node.s)[tg];
      switch (o.kind) {
        case ObjectiveKind::j_legible:
          return hga + bt.h_goals(b, tg, o.j - 1, false) - bt.h_goals(b, tg, n - o.j, true);
        case ObjectiveKind::k_ambiguous: return hga + bt.h_goals(b, tg, o.k - 1, false);
        case ObjectiveKind::m_similar:
          return hga + to_double(max_pairwise_distance(gm, prefix_bps(node, o.bps_cap), o.spec));
        case ObjectiveKind::l_diverse:
          return hga - to_double(min_pairwise_distance(gm, prefix_bps(node, o.bps_cap), o.spec));
      }
      return hga;
    };
    size_t expanded = 0;
    detail::SearchLimits lim{o.cost_bound, o.initial_delta, o.node_budget};
    auto found = detail::delta_search(bt, bt.goal_bits[tg], {&ob}, b0, lim, goal_test, heur, expanded);
    if (!found) return std::nullopt;
    COPPResult r;
    r.plan = detail::names_of(bt.t, found->first.ops);
    r.tokens = found->first.tokens[0];
    r.goals_in_final_belief = bt.goals_in(found->first.beliefs[0]);
    r.delta = found->second;
    r.expanded = expanded;
    r.k_used = o.k;
    return r;
  };

  if (auto r = run(obj)) return *r;
  if (obj.kind == ObjectiveKind::k_ambiguous && obj.fallback) {
    for (size_t k = obj.k; k-- > 1;) {
      COPPObjective o2 = obj;
      o2.k = k;
      if (auto r = run(o2)) return *r;
    }
  }
  throw NoObjectivePlan();
}

// One secure run: plan k-ambiguously over the goal subset with `decoy` as the search goal, then replay the
// resulting token sequence with a plan that reaches the true goal.
inline COPPResult secure_run(const COPPProblem& prob, const std::vector<size_t>& subset, size_t decoy,
                             COPPObjective base = {}) {
  COPPProblem sub = prob;
  sub.goals.clear();
  size_t decoy_pos = subset.size();
  for (size_t i = 0; i < subset.size(); ++i) {
    sub.goals.push_back(prob.goals.at(subset[i]));
    if (subset[i] == decoy) decoy_pos = i;
  }
  if (decoy_pos == subset.size()) throw std::invalid_argument("decoy outside the goal subset");
  sub.true_goal = decoy_pos;
  base.kind = ObjectiveKind::k_ambiguous;
  base.k = subset.size();
  base.fallback = false;
  base.required_goals.clear();
  COPPResult decoy_run = copp_search(sub, base);
  PlanningModel gm = detail::goal_model(prob.robot, prob.goals, prob.true_goal);
  auto replay = token_consistent_plans(gm, decoy_run.tokens, prob.sensor, gm.goal, 1);
  if (replay.plans.empty()) throw NoObjectivePlan();
  COPPResult r = decoy_run;
  r.plan = replay.plans.front();
  r.goals_in_final_belief =
      goals_in_belief(final_belief(gm, r.tokens, prob.sensor, prob.init_belief), prob.goals);
  r.k_used = subset.size();
  return r;
}

// Secure k-ambiguity: a random k-subset of goals containing the true goal and a uniformly random decoy from
// that subset drive the search; the output plan reaches the true goal under the decoy run's tokens.
inline COPPResult secure_k_ambiguous(const COPPProblem& prob, size_t k, uint64_t seed, COPPObjective base = {}) {
  const size_t n = prob.goals.size();
  if (k < 1 || k > n) throw std::invalid_argument("k out of range");
  if (prob.true_goal >= n) throw std::invalid_argument("true goal index out of range");
  PlanningModel gm = detail::goal_model(prob.robot, prob.goals, prob.true_goal);
  if (k == 1) {
    COPPResult r;
    r.plan = optimal_plan(gm).plan;
    r.tokens = observe_plan(gm, r.plan, prob.sensor);
    r.goals_in_final_belief =
        goals_in_belief(final_belief(gm, r.tokens, prob.sensor, prob.init_belief), prob.goals);
    r.k_used = 1;
    return r;
  }
  std::mt19937_64 rng(seed);
  std::vector<size_t> others;
  for (size_t i = 0; i < n; ++i)
    if (i != prob.true_goal) others.push_back(i);
  std::shuffle(others.begin(), others.end(), rng);
  std::vector<size_t> subset{prob.true_goal};
  subset.insert(subset.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1));
  std::sort(subset.begin(), subset.end());
  size_t decoy = subset[std::uniform_int_distribution<size_t>(0, subset.size() - 1)(rng)];
  return secure_run(prob, subset, decoy, base);
}

struct MOCOPPProblem {
  PlanningModel robot;
  std::vector<std::set<Fluent>> goals;
  size_t true_goal = 0;
  SensorModel sensor_x;  // adversarial observer
  SensorModel sensor_c;  // cooperative observer
  Belief init_x, init_c;
};

struct MOCOPPResult {
  Plan plan;
  std::vector<ObservationToken> tokens_x, tokens_c;
  std::vector<size_t> goals_x, goals_c;
  Rational gd{0};
  size_t expanded = 0;
};

inline Rational goal_difference(size_t in_x, size_t in_c, size_t n) {
  if (n < 2) throw std::invalid_argument("goal difference needs at least two goals");
  return Rational(static_cast<long long>(in_x) - static_cast<long long>(in_c), static_cast<long long>(n - 1));
}

// Plan for the true goal with at least k goals in the adversary's final belief and at most j in the
// cooperative observer's.
inline MOCOPPResult mo_copp_search(const MOCOPPProblem& prob, size_t k, size_t j, std::optional<Rational> cost_bound = {},
                                   size_t node_budget = 200000) {
  const size_t n = prob.goals.size();
  if (prob.true_goal >= n) throw std::invalid_argument("true goal index out of range");
  if (k < 1 || k > n || j < 1 || j > n) throw std::invalid_argument("bounds out of range");
  detail::BeliefTask bt(prob.robot, prob.goals);
  detail::Observer ox{&bt, &prob.sensor_x, {}}, oc{&bt, &prob.sensor_c, {}};
  std::vector<std::set<Bits>> b0{ox.initial(prob.init_x), oc.initial(prob.init_c)};
  const size_t tg = prob.true_goal;
  auto goal_test = [&](const detail::BeliefNode& node) {
    return bt.goals_in(node.beliefs[0]).size() >= k && bt.goals_in(node.beliefs[1]).size() <= j;
  };
  auto heur = [&](const detail::BeliefNode& node) {
    return bt.goal_h(node.s)[tg] + bt.h_goals(node.beliefs[0], tg, k - 1, false) -
           bt.h_goals(node.beliefs[1], tg, n - j, true);
  };
  size_t expanded = 0;
  detail::SearchLimits lim{cost_bound, 1, node_budget};
  auto found = detail::delta_search(bt, bt.goal_bits[tg], {&ox, &oc}, b0, lim, goal_test, heur, expanded);
  if (!found) throw NoObjectivePlan();
  MOCOPPResult r;
  r.plan = detail::names_of(bt.t, found->first.ops);
  r.tokens_x = found->first.tokens[0];
  r.tokens_c = found->first.tokens[1];
  r.goals_x = bt.goals_in(found->first.beliefs[0]);
  r.goals_c = bt.goals_in(found->first.beliefs[1]);
  r.gd = goal_difference(r.goals_x.size(), r.goals_c.size(), n);
  r.expanded = expanded;
  return r;
}

// Goal difference of a given plan under both observers.
inline MOCOPPResult evaluate_mo_plan(const MOCOPPProblem& prob, const Plan& plan) {
  PlanningModel gm = detail::goal_model(prob.robot, prob.goals, prob.true_goal);
  MOCOPPResult r;
  r.plan = plan;
  r.tokens_x = observe_plan(gm, plan, prob.sensor_x);
  r.tokens_c = observe_plan(gm, plan, prob.sensor_c);
  r.goals_x = goals_in_belief(final_belief(gm, r.tokens_x, prob.sensor_x, prob.init_x), prob.goals);
  r.goals_c = goals_in_belief(final_belief(gm, r.tokens_c, prob.sensor_c, prob.init_c), prob.goals);
  r.gd = goal_difference(r.goals_x.size(), r.goals_c.size(), prob.goals.size());
  return r;
}

}  // namespace hap
