#pragma once

#include "hap/model.hpp"

#include <memory>
#include <queue>
#include <unordered_set>

namespace hap {

struct SearchOptions {
  size_t node_budget = 1000000;
  Rational weight{1};  // > 1 turns A* into weighted (satisficing) A*
};

// h_max from state s to the fluent list `goal`; infinite when some goal fluent is unreachable.
inline Cost hmax(const Task& t, const Bits& s, const std::vector<int>& goal) {
  const size_t n = t.nf();
  std::vector<Cost> c(n, Cost::infinity());
  for (auto i : s.indices()) c[i] = Cost(0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& op : t.ops) {
      Cost pc(0);
      for (int p : op.pre_list) {
        if (c[p] > pc) pc = c[p];
        if (pc.is_inf()) break;
      }
      if (pc.is_inf()) continue;
      Cost reach = pc + Cost(op.cost);
      for (int a : op.add_list) {
        if (reach < c[a]) {
          c[a] = reach;
          changed = true;
        }
      }
    }
  }
  Cost h(0);
  for (int g : goal)
    if (c[g] > h) h = c[g];
  return h;
}

struct PlanResult {
  Plan plan;
  Rational cost{0};
  size_t expanded = 0;
};

namespace detail {

inline Plan names_of(const Task& t, const std::vector<int>& ops) {
  Plan p;
  p.reserve(ops.size());
  for (int o : ops) p.push_back(t.ops[o].name);
  return p;
}

}  // namespace detail

// A* with h_max. Among equal f values the lexicographically smaller action sequence is expanded first
// (a proper prefix sorts first), which makes the returned plan deterministic.
inline std::optional<PlanResult> astar(const Task& t, const Bits& start, const std::vector<int>& goal_list,
                                       const SearchOptions& opt = {}) {
  Bits goal(t.nf());
  for (int g : goal_list) goal.set(static_cast<size_t>(g));

  struct Node {
    Bits s;
    Rational g;
    Cost f;
    std::vector<int> ops;
  };
  auto worse = [](const Node* a, const Node* b) {
    if (a->f != b->f) return b->f < a->f;
    return b->ops < a->ops;
  };
  std::vector<std::unique_ptr<Node>> pool;
  std::priority_queue<Node*, std::vector<Node*>, decltype(worse)> open(worse);
  std::unordered_map<Bits, Rational, BitsHash> best_g;
  std::unordered_map<Bits, Cost, BitsHash> hcache;
  std::unordered_set<Bits, BitsHash> closed;

  auto h_of = [&](const Bits& s) {
    auto it = hcache.find(s);
    if (it != hcache.end()) return it->second;
    Cost h = hmax(t, s, goal_list);
    if (h.finite() && opt.weight != 1) h = Cost(h.value() * opt.weight);
    hcache.emplace(s, h);
    return h;
  };

  Cost h0 = h_of(start);
  if (h0.is_inf()) return std::nullopt;
  pool.push_back(std::make_unique<Node>(Node{start, Rational(0), h0, {}}));
  open.push(pool.back().get());
  best_g[start] = 0;
  size_t expanded = 0;

  while (!open.empty()) {
    Node* n = open.top();
    open.pop();
    if (closed.count(n->s)) continue;
    if (n->s.contains(goal)) {
      return PlanResult{detail::names_of(t, n->ops), n->g, expanded};
    }
    closed.insert(n->s);
    if (++expanded > opt.node_budget) throw ResourceLimit("A* node budget exhausted");
    for (size_t i = 0; i < t.ops.size(); ++i) {
      const auto& op = t.ops[i];
      if (!n->s.contains(op.pre)) continue;
      Bits s2 = t.apply(n->s, op);
      if (closed.count(s2)) continue;
      Rational g2 = n->g + op.cost;
      auto it = best_g.find(s2);
      if (it != best_g.end() && it->second < g2) continue;
      Cost h2 = h_of(s2);
      if (h2.is_inf()) continue;
      best_g[s2] = g2;
      auto ops2 = n->ops;
      ops2.push_back(static_cast<int>(i));
      pool.push_back(std::make_unique<Node>(Node{s2, g2, Cost(g2) + h2, std::move(ops2)}));
      open.push(pool.back().get());
    }
  }
  return std::nullopt;
}

inline PlanResult optimal_plan(const PlanningModel& m, const SearchOptions& opt = {}) {
  Task t = compile(m);
  auto r = astar(t, t.init, t.goal_list, opt);
  if (!r) throw Unsolvable();
  return *r;
}

// C*_M, or +inf when the model is unsolvable.
inline Cost optimal_cost(const PlanningModel& m, const SearchOptions& opt = {}) {
  Task t = compile(m);
  auto r = astar(t, t.init, t.goal_list, opt);
  if (!r) return Cost::infinity();
  return Cost(r->cost);
}

struct PlanSet {
  std::vector<Plan> plans;
  bool truncated = false;
};

namespace detail {

// Loop-free DFS over plans from `start`. Emits every visited node that satisfies the goal with
// g within the bound (or exactly equal to the bound when exact_cost is set).
struct BoundedDfs {
  const Task& t;
  Bits goal;
  Rational bound;
  bool exact_cost;
  bool stop_at_goal;
  size_t cap;
  size_t budget;
  size_t nodes = 0;
  PlanSet out;
  std::unordered_set<Bits, BitsHash> on_path;
  std::unordered_map<Bits, Cost, BitsHash> hcache;
  std::vector<int> path;
  Plan prefix;

  BoundedDfs(const Task& task, const std::vector<int>& goal_list, Rational b, bool exact, bool stop, size_t c,
             size_t bud)
      : t(task), goal(task.nf()), bound(b), exact_cost(exact), stop_at_goal(stop), cap(c), budget(bud) {
    for (int g : goal_list) goal.set(static_cast<size_t>(g));
  }

  Cost h(const Bits& s) {
    auto it = hcache.find(s);
    if (it != hcache.end()) return it->second;
    std::vector<int> gl;
    for (auto i : goal.indices()) gl.push_back(static_cast<int>(i));
    Cost v = hmax(t, s, gl);
    hcache.emplace(s, v);
    return v;
  }

  // returns false when the search must stop
  bool run(const Bits& s, const Rational& g) {
    if (++nodes > budget) {
      out.truncated = true;
      return false;
    }
    bool at_goal = s.contains(goal);
    if (at_goal && (!exact_cost || g == bound)) {
      Plan p = prefix;
      for (int o : path) p.push_back(t.ops[o].name);
      out.plans.push_back(std::move(p));
      if (out.plans.size() >= cap) {
        out.truncated = true;
        return false;
      }
    }
    if (at_goal && stop_at_goal) return true;
    for (size_t i = 0; i < t.ops.size(); ++i) {
      const auto& op = t.ops[i];
      if (!s.contains(op.pre)) continue;
      Rational g2 = g + op.cost;
      if (g2 > bound) continue;
      Bits s2 = t.apply(s, op);
      if (on_path.count(s2)) continue;
      Cost hv = h(s2);
      if (hv.is_inf() || Cost(g2) + hv > Cost(bound)) continue;
      on_path.insert(s2);
      path.push_back(static_cast<int>(i));
      bool go = run(s2, g2);
      path.pop_back();
      on_path.erase(s2);
      if (!go) return false;
    }
    return true;
  }
};

}  // namespace detail

inline PlanSet enumerate_optimal(const PlanningModel& m, size_t cap, const SearchOptions& opt = {}) {
  if (cap < 1) throw std::invalid_argument("cap must be at least 1");
  Task t = compile(m);
  auto best = astar(t, t.init, t.goal_list, opt);
  if (!best) throw Unsolvable();
  detail::BoundedDfs dfs(t, t.goal_list, best->cost, true, true, cap, opt.node_budget);
  dfs.on_path.insert(t.init);
  dfs.run(t.init, Rational(0));
  return dfs.out;
}

inline PlanSet enumerate_valid_bounded(const PlanningModel& m, const Rational& cost_bound, size_t cap,
                                       const SearchOptions& opt = {}) {
  if (cost_bound < 0) throw std::invalid_argument("cost bound must be non-negative");
  Task t = compile(m);
  detail::BoundedDfs dfs(t, t.goal_list, cost_bound, false, false, cap, opt.node_budget);
  dfs.on_path.insert(t.init);
  dfs.run(t.init, Rational(0));
  return dfs.out;
}

// Loop-free goal-achieving completions prefix + sigma whose total cost stays within the bound.
// The returned plans include the prefix. Throws InvalidPlan when the prefix is inexecutable.
inline PlanSet enumerate_completions(const PlanningModel& m, const Plan& prefix, const Rational& cost_bound,
                                     size_t cap, const SearchOptions& opt = {}) {
  Task t = compile(m);
  detail::BoundedDfs dfs(t, t.goal_list, cost_bound, false, false, cap, opt.node_budget);
  Bits s = t.init;
  Rational g(0);
  dfs.on_path.insert(s);
  for (const auto& name : prefix) {
    auto it = t.op_index.find(name);
    if (it == t.op_index.end()) throw UnknownAction(name);
    const auto& op = t.ops[it->second];
    if (!s.contains(op.pre)) throw InvalidPlan("prefix inexecutable at '" + name + "'");
    s = t.apply(s, op);
    g += op.cost;
    if (dfs.on_path.count(s)) throw InvalidPlan("prefix revisits a state");
    dfs.on_path.insert(s);
  }
  dfs.prefix = prefix;
  if (g <= cost_bound) dfs.run(s, g);
  return dfs.out;
}

}  // namespace hap
