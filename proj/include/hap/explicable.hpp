#pragma once

#include "hap/combinations.hpp"
#include "hap/gamma.hpp"
#include "hap/labeling.hpp"
#include "hap/scores.hpp"

#include <cmath>
#include <deque>
#include <functional>

namespace hap {

struct SearchStuck : std::runtime_error {
  SearchStuck() : std::runtime_error("hill climbing and best-first fallback both failed") {}
};
struct AllConfigsUnsolvable : std::runtime_error {
  AllConfigsUnsolvable() : std::runtime_error("every design configuration is unsolvable") {}
};

struct ExplicableProblem {
  PlanningModel robot;
  PlanningModel mental;
  DistanceSpec spec = DistanceSpec::cost_difference();
  Rational max_cost{0};
};

struct ExplicableResult {
  Plan plan;
  Cost ie;
  Rational cost{0};
  size_t expanded = 0;
  size_t candidates = 0;
  bool budget_exhausted = false;
};

struct ReconciliationOptions {
  size_t expected_cap = 100;
  size_t node_budget = 1000000;
  SearchOptions search;
  std::function<void(const ExplicableResult&)> on_incumbent;
};

// IE of a robot plan against a set of expected mental-model plans.
inline Cost plan_ie(const ExplicableProblem& p, const Plan& plan, const std::vector<Plan>& expected) {
  const PlanningModel& src = p.spec.kind == DistanceKind::cost_difference ? p.mental : p.robot;
  return min_distance_to_set(src, plan, p.mental, expected, p.spec).distance;
}

// Best-first search over robot plan prefixes ordered by the distance of the prefix to equal-length prefixes
// of the expected plans. Goal nodes only update the incumbent; the search runs until every prefix within
// max_cost has been examined (IE is not monotone along prefixes). Ties: lower IE, lower cost, lexicographic.
inline ExplicableResult reconciliation_search(const ExplicableProblem& p, const ReconciliationOptions& ro = {}) {
  p.spec.check();
  Cost cstar = optimal_cost(p.robot, ro.search);
  if (cstar.is_inf()) throw Unsolvable("robot model is unsolvable");
  if (p.max_cost < cstar.value()) throw std::invalid_argument("max_cost is below the optimal robot cost");
  std::vector<Plan> expected = enumerate_optimal(p.mental, ro.expected_cap, ro.search).plans;
  Task t = compile(p.robot);

  struct Node {
    Cost h;
    Rational g;
    std::vector<int> ops;
    Bits s;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.h != b.h) return b.h < a.h;
    if (a.g != b.g) return a.g > b.g;
    return a.ops > b.ops;
  };
  auto prefix_h = [&](const Plan& prefix) {
    Cost best = Cost::infinity();
    for (const auto& e : expected) {
      Cost d;
      try {
        d = prefix_distance(p.robot, prefix, p.mental, e, p.spec);
      } catch (const std::exception&) {
        d = Cost::infinity();
      }
      if (d < best) best = d;
    }
    return best;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  open.push({Cost(0), Rational(0), {}, t.init});
  std::unordered_map<Bits, Cost, BitsHash> hcache;
  ExplicableResult best;
  bool have = false;
  size_t expanded = 0;
  while (!open.empty()) {
    Node n = open.top();
    open.pop();
    if (++expanded > ro.node_budget) {
      if (!have) throw ResourceLimit("reconciliation search budget exhausted without a plan");
      best.budget_exhausted = true;
      break;
    }
    Plan plan = detail::names_of(t, n.ops);
    if (n.s.contains(t.goal)) {
      ++best.candidates;
      Cost ie = plan_ie(p, plan, expected);
      bool better = !have || ie < best.ie ||
                    (ie == best.ie && (n.g < best.cost || (n.g == best.cost && plan < best.plan)));
      if (better) {
        best.plan = plan;
        best.ie = ie;
        best.cost = n.g;
        have = true;
        if (ro.on_incumbent) ro.on_incumbent(best);
      }
    }
    // loop-free: states along the prefix are not revisited
    std::unordered_set<Bits, BitsHash> on_path;
    {
      Bits s = t.init;
      on_path.insert(s);
      for (int o : n.ops) {
        s = t.apply(s, t.ops[o]);
        on_path.insert(s);
      }
    }
    for (size_t i = 0; i < t.ops.size(); ++i) {
      const auto& op = t.ops[i];
      if (!n.s.contains(op.pre)) continue;
      Rational g2 = n.g + op.cost;
      if (g2 > p.max_cost) continue;
      Bits s2 = t.apply(n.s, op);
      if (on_path.count(s2)) continue;
      auto it = hcache.find(s2);
      Cost hm = it != hcache.end() ? it->second : hmax(t, s2, t.goal_list);
      if (it == hcache.end()) hcache.emplace(s2, hm);
      if (hm.is_inf() || Cost(g2) + hm > Cost(p.max_cost)) continue;
      auto ops2 = n.ops;
      ops2.push_back(static_cast<int>(i));
      Plan pre2 = plan;
      pre2.push_back(op.name);
      open.push({prefix_h(pre2), g2, std::move(ops2), std::move(s2)});
    }
  }
  if (!have) throw Unsolvable("no robot plan within max_cost");
  best.expanded = expanded;
  return best;
}

// Cost of a relaxed plan (best supporters from h_add) and its actions, used as h_cost and the relaxed suffix.
struct RelaxedPlan {
  Cost cost;
  std::vector<int> ops;
};

inline RelaxedPlan relaxed_plan(const Task& t, const Bits& s) {
  const size_t n = t.nf();
  std::vector<Cost> c(n, Cost::infinity());
  std::vector<int> sup(n, -1);
  for (auto i : s.indices()) c[i] = Cost(0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t o = 0; o < t.ops.size(); ++o) {
      const auto& op = t.ops[o];
      Cost pc(0);
      for (int p : op.pre_list) {
        pc += c[p];
        if (pc.is_inf()) break;
      }
      if (pc.is_inf()) continue;
      Cost reach = pc + Cost(op.cost);
      for (int a : op.add_list)
        if (reach < c[a]) {
          c[a] = reach;
          sup[a] = static_cast<int>(o);
          changed = true;
        }
    }
  }
  for (int g : t.goal_list)
    if (c[g].is_inf()) return {Cost::infinity(), {}};
  std::set<int> chosen;
  std::vector<bool> done(n, false);
  std::vector<int> stack(t.goal_list.begin(), t.goal_list.end());
  while (!stack.empty()) {
    int f = stack.back();
    stack.pop_back();
    if (done[f]) continue;
    done[f] = true;
    if (sup[f] < 0 || s.test(static_cast<size_t>(f))) continue;
    if (chosen.insert(sup[f]).second)
      for (int p : t.ops[sup[f]].pre_list) stack.push_back(p);
  }
  RelaxedPlan rp{Cost(0), {}};
  for (int o : chosen) {
    rp.cost += Cost(t.ops[o].cost);
    rp.ops.push_back(o);
  }
  return rp;
}

struct EhcResult {
  Plan plan;
  Rational cost{0};
  bool used_fallback = false;
  size_t expanded = 0;
};

// Enforced hill climbing on h = h_cost + w * IE_est, where IE_est is the fraction of inexplicable steps over
// the prefix (full step keys) and the relaxed suffix (action keys only). Falls back to greedy best-first
// search when a plateau cannot be escaped.
inline EhcResult ehc_explicable(const PlanningModel& robot, const LabelingModel& lab, const Rational& combine_weight,
                                size_t node_budget = 200000) {
  Task t = compile(robot);
  struct Node {
    Bits s;
    Rational g;
    std::vector<int> ops;
    long long bad = 0;  // inexplicable prefix steps
  };
  auto h_of = [&](const Node& n) -> Cost {
    RelaxedPlan rp = relaxed_plan(t, n.s);
    if (rp.cost.is_inf()) return rp.cost;
    if (combine_weight == 0) return rp.cost;
    long long bad = n.bad;
    for (int o : rp.ops)
      if (lab.action_prob(t.ops[o].name) < lab.threshold) ++bad;
    long long total = static_cast<long long>(n.ops.size() + rp.ops.size());
    Rational ie = total == 0 ? Rational(0) : Rational(bad, total);
    return rp.cost + Cost(combine_weight * ie);
  };
  auto child = [&](const Node& n, size_t i) {
    const auto& op = t.ops[i];
    Node c{t.apply(n.s, op), n.g + op.cost, n.ops, n.bad};
    c.ops.push_back(static_cast<int>(i));
    std::string key = step_key(op.name, t.to_state(n.s), t.to_state(c.s), lab.mode);
    if (lab.prob(key) < lab.threshold) ++c.bad;
    return c;
  };
  size_t expanded = 0;
  Node cur{t.init, Rational(0), {}, 0};
  Cost hcur = h_of(cur);
  if (hcur.is_inf()) throw Unsolvable("robot model is unsolvable");
  bool stuck = false;
  while (!cur.s.contains(t.goal) && !stuck) {
    std::deque<Node> q{cur};
    std::unordered_set<Bits, BitsHash> seen{cur.s};
    bool improved = false;
    while (!q.empty() && !improved) {
      Node n = q.front();
      q.pop_front();
      for (size_t i = 0; i < t.ops.size(); ++i) {
        if (!n.s.contains(t.ops[i].pre)) continue;
        Node c = child(n, i);
        if (seen.count(c.s)) continue;
        seen.insert(c.s);
        if (++expanded > node_budget) throw ResourceLimit("EHC budget exhausted");
        Cost hc = h_of(c);
        if (hc.is_inf()) continue;
        if (hc < hcur || c.s.contains(t.goal)) {
          cur = c;
          hcur = hc;
          improved = true;
          break;
        }
        q.push_back(c);
      }
    }
    if (!improved) stuck = true;
  }
  if (!stuck) return {detail::names_of(t, cur.ops), cur.g, false, expanded};

  // greedy best-first fallback from the initial state
  struct Entry {
    Cost h;
    size_t order;
    Node n;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.h != b.h) return b.h < a.h;
    return a.order > b.order;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::unordered_set<Bits, BitsHash> closed;
  size_t order = 0;
  Node root{t.init, Rational(0), {}, 0};
  open.push({h_of(root), order++, root});
  while (!open.empty()) {
    Entry e = open.top();
    open.pop();
    if (e.n.s.contains(t.goal)) return {detail::names_of(t, e.n.ops), e.n.g, true, expanded};
    if (closed.count(e.n.s)) continue;
    closed.insert(e.n.s);
    if (++expanded > node_budget) throw ResourceLimit("EHC fallback budget exhausted");
    for (size_t i = 0; i < t.ops.size(); ++i) {
      if (!e.n.s.contains(t.ops[i].pre)) continue;
      Node c = child(e.n, i);
      if (closed.count(c.s)) continue;
      Cost hc = h_of(c);
      if (hc.is_inf()) continue;
      open.push({hc, order++, std::move(c)});
    }
  }
  throw SearchStuck();
}

enum class ModTarget { robot, mental, both };

struct ModEdit {
  Edit edit;
  ModTarget target = ModTarget::both;
};

struct Modification {
  std::string id;
  std::vector<ModEdit> edits;
  Rational cost{0};
};

struct DesignTask {
  PlanningModel robot;
  PlanningModel mental;
  Rational prob{1};
};

struct DesignProblem {
  std::vector<DesignTask> tasks;
  std::vector<Modification> mods;
  size_t horizon = 1;
  Rational discount{0};
  Rational alpha{1}, beta{1}, kappa{0};
  Rational cost_slack{0};  // per-task plan cost bound = C*_robot + slack
  size_t max_mods = 64;
  bool prune = true;

  void check() const {
    if (tasks.empty()) throw std::invalid_argument("design problem has no tasks");
    Rational s(0);
    for (const auto& t : tasks) s += t.prob;
    if (s != 1) throw std::invalid_argument("task distribution must sum to 1");
    for (const auto& m : mods)
      if (m.cost < 0) throw std::invalid_argument("negative modification cost");
    if (discount < 0 || discount >= 1) throw std::invalid_argument("discount must lie in [0,1)");
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  }
};

// (1 - gamma^T) / (1 - gamma), and 1 when gamma = 0.
inline double longitudinal_multiplier(const Rational& gamma, size_t horizon) {
  if (gamma == 0) return 1.0;
  double g = to_double(gamma);
  return (1.0 - std::pow(g, static_cast<double>(horizon))) / (1.0 - g);
}

struct TaskOutcome {
  Plan plan;
  Cost ie;
  Rational cost{0};
};

struct DesignResult {
  std::vector<std::string> chosen;
  double objective = 0;
  std::vector<TaskOutcome> per_task;
  size_t configs_evaluated = 0;
  std::vector<std::string> relevant;
};

inline std::pair<PlanningModel, PlanningModel> apply_design(const DesignTask& task, const std::vector<const Modification*>& mods) {
  std::vector<Edit> er, em;
  std::set<Fluent> extra;
  for (const auto* m : mods)
    for (const auto& e : m->edits) {
      if (e.target != ModTarget::mental) er.push_back(e.edit);
      if (e.target != ModTarget::robot) em.push_back(e.edit);
    }
  return {apply_explanation(task.robot, er), apply_explanation(task.mental, em)};
}

// Mods whose edits touch an action used by some optimal robot or human plan of a base task (directly, or
// through an init/goal fluent appearing in such an action).
inline std::vector<size_t> relevant_mods(const DesignProblem& dp, const SearchOptions& opt = {}) {
  std::set<std::string> acts;
  std::set<Fluent> fl;
  for (const auto& task : dp.tasks) {
    for (const auto* m : {&task.robot, &task.mental}) {
      PlanSet ps;
      try {
        ps = enumerate_optimal(*m, 100, opt);
      } catch (const Unsolvable&) {
        continue;
      }
      for (const auto& p : ps.plans)
        for (const auto& a : p) {
          acts.insert(a);
          auto it = m->actions.find(a);
          if (it == m->actions.end()) continue;
          fl.insert(it->second.pre.begin(), it->second.pre.end());
          fl.insert(it->second.add.begin(), it->second.add.end());
          fl.insert(it->second.del.begin(), it->second.del.end());
        }
    }
  }
  std::vector<size_t> out;
  for (size_t i = 0; i < dp.mods.size(); ++i) {
    bool hit = false;
    for (const auto& e : dp.mods[i].edits) {
      const auto& f = e.edit.feature;
      if (f.is_action_feature() ? acts.count(f.action) > 0 : fl.count(f.fluent) > 0) hit = true;
    }
    if (hit) out.push_back(i);
  }
  return out;
}

// Breadth-first search over modification subsets minimizing
// alpha * multiplier * E[IE_min] + beta * C(xi) + kappa * E[C_R] * T.
inline DesignResult design_search(const DesignProblem& dp, const ReconciliationOptions& ro = {}) {
  dp.check();
  std::vector<size_t> pool;
  if (dp.prune) {
    pool = relevant_mods(dp, ro.search);
  } else {
    for (size_t i = 0; i < dp.mods.size(); ++i) pool.push_back(i);
  }
  const double mult = longitudinal_multiplier(dp.discount, dp.horizon);
  std::optional<DesignResult> best;
  size_t evaluated = 0;
  auto evaluate = [&](const std::vector<size_t>& subset) -> std::optional<DesignResult> {
    std::vector<const Modification*> ms;
    Rational mod_cost(0);
    std::vector<std::string> ids;
    for (auto i : subset) {
      ms.push_back(&dp.mods[i]);
      mod_cost += dp.mods[i].cost;
      ids.push_back(dp.mods[i].id);
    }
    std::sort(ids.begin(), ids.end());
    DesignResult r;
    r.chosen = ids;
    double exp_ie = 0, exp_cost = 0;
    for (const auto& task : dp.tasks) {
      auto [rm, mm] = apply_design(task, ms);
      Cost cstar = optimal_cost(rm, ro.search);
      if (cstar.is_inf() || optimal_cost(mm, ro.search).is_inf()) return std::nullopt;
      ExplicableProblem ep{rm, mm, DistanceSpec::cost_difference(), cstar.value() + dp.cost_slack};
      ExplicableResult er = reconciliation_search(ep, ro);
      if (er.ie.is_inf()) return std::nullopt;
      exp_ie += to_double(task.prob) * er.ie.to_double();
      exp_cost += to_double(task.prob) * to_double(er.cost);
      r.per_task.push_back({er.plan, er.ie, er.cost});
    }
    r.objective = to_double(dp.alpha) * mult * exp_ie + to_double(dp.beta) * to_double(mod_cost) +
                  to_double(dp.kappa) * exp_cost * static_cast<double>(dp.horizon);
    return r;
  };
  auto better = [](const DesignResult& a, const DesignResult& b) {
    if (std::abs(a.objective - b.objective) > 1e-9) return a.objective < b.objective;
    if (a.chosen.size() != b.chosen.size()) return a.chosen.size() < b.chosen.size();
    return a.chosen < b.chosen;
  };
  const size_t n = pool.size();
  for (size_t depth = 0; depth <= std::min(n, dp.max_mods); ++depth) {
    for_each_combination(n, depth, [&](const std::vector<size_t>& idx) {
      std::vector<size_t> subset;
      for (auto i : idx) subset.push_back(pool[i]);
      ++evaluated;
      auto r = evaluate(subset);
      if (r && (!best || better(*r, *best))) best = std::move(r);
      return false;
    });
  }
  if (!best) throw AllConfigsUnsolvable();
  best->configs_evaluated = evaluated;
  for (auto i : pool) best->relevant.push_back(dp.mods[i].id);
  return *best;
}

}  // namespace hap
