#pragma once

#include "hap/hap.hpp"

#include <queue>
#include <random>

namespace oracle {

using hap::ActionDef;
using hap::Edit;
using hap::Feature;
using hap::FeatureKind;
using hap::Fluent;
using hap::Plan;
using hap::PlanningModel;
using hap::Rational;
using hap::TaskState;
using Rng = std::mt19937_64;

inline size_t pick(Rng& rng, size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

// ---- plain state-space semantics ----

inline std::optional<TaskState> step(const PlanningModel& m, const TaskState& s, const std::string& a) {
  auto it = m.actions.find(a);
  if (it == m.actions.end()) return std::nullopt;
  for (const auto& f : it->second.pre)
    if (!s.count(f)) return std::nullopt;
  TaskState n = s;
  for (const auto& f : it->second.del) n.erase(f);
  for (const auto& f : it->second.add) n.insert(f);
  return n;
}

inline bool goal_holds(const PlanningModel& m, const TaskState& s) {
  for (const auto& g : m.goal)
    if (!s.count(g)) return false;
  return true;
}

inline std::optional<Rational> cost_of(const PlanningModel& m, const Plan& p) {
  TaskState s = m.init;
  Rational c(0);
  for (const auto& a : p) {
    auto n = step(m, s, a);
    if (!n) return std::nullopt;
    c += m.actions.at(a).cost;
    s = *n;
  }
  if (!goal_holds(m, s)) return std::nullopt;
  return c;
}

// Uniform-cost search over explicit states.
inline std::optional<Rational> optimum(const PlanningModel& m) {
  using Entry = std::pair<Rational, TaskState>;
  auto cmp = [](const Entry& a, const Entry& b) { return a.first > b.first; };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> open(cmp);
  std::map<TaskState, Rational> best;
  open.push({Rational(0), m.init});
  best[m.init] = 0;
  while (!open.empty()) {
    auto [g, s] = open.top();
    open.pop();
    if (best[s] < g) continue;
    if (goal_holds(m, s)) return g;
    for (const auto& [name, a] : m.actions) {
      auto n = step(m, s, name);
      if (!n) continue;
      Rational g2 = g + a.cost;
      auto it = best.find(*n);
      if (it == best.end() || g2 < it->second) {
        best[*n] = g2;
        open.push({g2, *n});
      }
    }
  }
  return std::nullopt;
}

inline bool optimal_in(const PlanningModel& m, const Plan& p) {
  auto c = cost_of(m, p);
  if (!c) return false;
  auto o = optimum(m);
  return o && *c == *o;
}

// ---- feature edits, applied directly to the model ----

inline void apply(PlanningModel& m, const Feature& f, bool add) {
  auto set_of = [&]() -> std::set<Fluent>* {
    switch (f.kind) {
      case FeatureKind::init: return &m.init;
      case FeatureKind::goal: return &m.goal;
      case FeatureKind::pre: return &m.actions.at(f.action).pre;
      case FeatureKind::add: return &m.actions.at(f.action).add;
      case FeatureKind::del: return &m.actions.at(f.action).del;
      case FeatureKind::cost: return nullptr;
    }
    return nullptr;
  };
  if (f.kind == FeatureKind::cost) {
    if (add) m.actions.at(f.action).cost = f.cost;
    return;
  }
  if (!f.fluent.empty()) m.fluents.insert(f.fluent);
  auto* s = set_of();
  if (add)
    s->insert(f.fluent);
  else
    s->erase(f.fluent);
}

inline PlanningModel edited(PlanningModel m, const std::vector<Edit>& es) {
  for (const auto& e : es)
    if (!e.add) apply(m, e.feature, false);
  for (const auto& e : es)
    if (e.add) apply(m, e.feature, true);
  for (auto& [_, a] : m.actions)
    for (const auto& f : a.add) a.del.erase(f);
  return m;
}

// Feature-level difference from `from` to `to`, computed without the library.
inline std::vector<Edit> difference(const PlanningModel& from, const PlanningModel& to) {
  std::vector<Edit> out;
  auto diff_sets = [&](const std::set<Fluent>& a, const std::set<Fluent>& b, auto make) {
    for (const auto& f : b)
      if (!a.count(f)) out.push_back({true, make(f)});
    for (const auto& f : a)
      if (!b.count(f)) out.push_back({false, make(f)});
  };
  diff_sets(from.init, to.init, [](const Fluent& f) { return Feature::init(f); });
  diff_sets(from.goal, to.goal, [](const Fluent& f) { return Feature::goal(f); });
  for (const auto& [n, a] : to.actions) {
    const auto& b = from.actions.at(n);
    diff_sets(b.pre, a.pre, [&](const Fluent& f) { return Feature::pre(n, f); });
    diff_sets(b.add, a.add, [&](const Fluent& f) { return Feature::add(n, f); });
    diff_sets(b.del, a.del, [&](const Fluent& f) { return Feature::del(n, f); });
    if (a.cost != b.cost) out.push_back({true, Feature::cost_of(n, a.cost)});
  }
  return out;
}

// ---- random instances ----

struct ModelShape {
  size_t fluents = 5;
  size_t actions = 5;
  size_t max_pre = 2;
  size_t max_add = 2;
  size_t max_del = 1;
  size_t max_cost = 3;
  size_t goal_size = 2;
};

inline std::string fluent_name(size_t i) { return "f" + std::to_string(i); }

inline std::set<Fluent> random_subset(Rng& rng, size_t n, size_t k) {
  std::set<Fluent> out;
  while (out.size() < std::min(k, n)) out.insert(fluent_name(pick(rng, n)));
  return out;
}

// A random model with a reachable, non-trivial goal.
inline PlanningModel random_model(Rng& rng, const ModelShape& sh = {}) {
  while (true) {
    PlanningModel m;
    for (size_t i = 0; i < sh.fluents; ++i) m.fluents.insert(fluent_name(i));
    for (size_t i = 0; i < sh.actions; ++i) {
      ActionDef a;
      a.name = "a" + std::to_string(i);
      a.pre = random_subset(rng, sh.fluents, pick(rng, sh.max_pre + 1));
      a.add = random_subset(rng, sh.fluents, 1 + pick(rng, sh.max_add));
      a.del = random_subset(rng, sh.fluents, pick(rng, sh.max_del + 1));
      for (const auto& f : a.add) a.del.erase(f);
      a.cost = Rational(static_cast<long long>(1 + pick(rng, sh.max_cost)));
      m.actions[a.name] = a;
    }
    m.init = random_subset(rng, sh.fluents, 1 + pick(rng, 2));
    m.goal = random_subset(rng, sh.fluents, sh.goal_size);
    if (goal_holds(m, m.init)) continue;
    if (optimum(m)) return m;
  }
}

// All candidate features over the model's vocabulary (no cost features).
inline std::vector<Feature> feature_universe(const PlanningModel& m) {
  std::vector<Feature> out;
  for (const auto& f : m.fluents) {
    out.push_back(Feature::init(f));
    out.push_back(Feature::goal(f));
    for (const auto& [n, _] : m.actions) {
      out.push_back(Feature::pre(n, f));
      out.push_back(Feature::add(n, f));
      out.push_back(Feature::del(n, f));
    }
  }
  return out;
}

inline bool has_feature(const PlanningModel& m, const Feature& f) {
  switch (f.kind) {
    case FeatureKind::init: return m.init.count(f.fluent) > 0;
    case FeatureKind::goal: return m.goal.count(f.fluent) > 0;
    case FeatureKind::pre: return m.actions.at(f.action).pre.count(f.fluent) > 0;
    case FeatureKind::add: return m.actions.at(f.action).add.count(f.fluent) > 0;
    case FeatureKind::del: return m.actions.at(f.action).del.count(f.fluent) > 0;
    case FeatureKind::cost: return m.actions.at(f.action).cost == f.cost;
  }
  return false;
}

// Flips `k` random features (and sometimes one action cost) of the robot model.
inline PlanningModel perturb(Rng& rng, const PlanningModel& robot, size_t k, bool allow_cost = true) {
  PlanningModel h = robot;
  auto uni = feature_universe(robot);
  std::set<std::string> flipped;
  size_t changed = 0;
  while (changed < k) {
    const Feature& f = uni[pick(rng, uni.size())];
    if (!flipped.insert(f.key()).second) continue;
    if (f.kind == FeatureKind::add && has_feature(h, Feature::del(f.action, f.fluent))) continue;
    if (f.kind == FeatureKind::del && has_feature(h, Feature::add(f.action, f.fluent))) continue;
    apply(h, f, !has_feature(h, f));
    ++changed;
  }
  if (allow_cost && coin(rng, 0.3)) {
    auto it = std::next(h.actions.begin(), static_cast<long>(pick(rng, h.actions.size())));
    it->second.cost = it->second.cost + 1;
  }
  return h;
}

// ---- brute-force explanation oracles ----

struct ExplanationOracle {
  std::vector<Edit> delta;
  std::vector<bool> ok;  // ok[mask]: the plan is optimal in mental + edits(mask)

  ExplanationOracle(const PlanningModel& robot, const PlanningModel& mental, const Plan& plan)
      : delta(difference(mental, robot)) {
    const size_t n = delta.size();
    ok.assign(size_t{1} << n, false);
    for (size_t mask = 0; mask < ok.size(); ++mask) {
      std::vector<Edit> es;
      for (size_t i = 0; i < n; ++i)
        if (mask >> i & 1u) es.push_back(delta[i]);
      ok[mask] = optimal_in(edited(mental, es), plan);
    }
  }

  size_t full() const { return ok.size() - 1; }

  size_t mce_size() const {
    size_t best = delta.size() + 1;
    for (size_t mask = 0; mask < ok.size(); ++mask)
      if (ok[mask]) best = std::min<size_t>(best, static_cast<size_t>(__builtin_popcountll(mask)));
    return best;
  }

  // Largest S such that the plan stays optimal whenever any subset of S is withheld from the full difference.
  size_t mme_size() const {
    std::vector<bool> closed(ok.size(), false);
    size_t best_s = 0;
    for (size_t s = 0; s < ok.size(); ++s) {
      bool c = ok[full() & ~s];
      for (size_t i = 0; c && i < delta.size(); ++i)
        if (s >> i & 1u) c = closed[s & ~(size_t{1} << i)];
      closed[s] = c;
      if (c) best_s = std::max<size_t>(best_s, static_cast<size_t>(__builtin_popcountll(s)));
    }
    return delta.size() - best_s;
  }

  size_t mask_of(const std::vector<Edit>& es) const {
    size_t m = 0;
    for (const auto& e : es)
      for (size_t i = 0; i < delta.size(); ++i)
        if (delta[i].add == e.add && delta[i].feature.key() == e.feature.key()) m |= size_t{1} << i;
    return m;
  }

  bool complete(const std::vector<Edit>& es) const { return ok[mask_of(es)]; }

  bool monotone(const std::vector<Edit>& es) const {
    size_t kept = mask_of(es);
    size_t s = full() & ~kept;
    for (size_t sub = s;; sub = (sub - 1) & s) {
      if (!ok[full() & ~sub]) return false;
      if (sub == 0) break;
    }
    return true;
  }
};

// ---- annotated models ----

inline PlanningModel realize(const hap::AnnotatedModel& am, const std::vector<bool>& r) {
  PlanningModel m = am.known;
  for (size_t i = 0; i < r.size(); ++i)
    if (r[i]) apply(m, am.possible[i].feature(), true);
  for (auto& [_, a] : m.actions)
    for (const auto& f : a.add) a.del.erase(f);
  return m;
}

inline Rational robustness(const hap::AnnotatedModel& am, const Plan& plan) {
  Rational total(0);
  const size_t k = am.possible.size();
  for (size_t mask = 0; mask < (size_t{1} << k); ++mask) {
    std::vector<bool> r(k);
    Rational p(1);
    for (size_t i = 0; i < k; ++i) {
      r[i] = mask >> i & 1u;
      p *= r[i] ? am.possible[i].prob : Rational(1) - am.possible[i].prob;
    }
    if (optimal_in(realize(am, r), plan)) total += p;
  }
  return total;
}

// ---- observation oracle ----

// Final states of every action sequence whose observations equal `tokens`.
inline std::set<TaskState> consistent_finals(const PlanningModel& m, const hap::SensorModel& sensor,
                                             const std::vector<hap::ObservationToken>& tokens) {
  std::set<TaskState> frontier{m.init};
  for (const auto& t : tokens) {
    std::set<TaskState> next;
    for (const auto& s : frontier)
      for (const auto& [name, _] : m.actions) {
        auto n = step(m, s, name);
        if (n && sensor.observe(name, *n) == t) next.insert(*n);
      }
    frontier = std::move(next);
  }
  return frontier;
}

inline std::vector<size_t> goals_in(const std::set<TaskState>& finals, const std::vector<std::set<Fluent>>& goals) {
  std::vector<size_t> out;
  for (size_t g = 0; g < goals.size(); ++g)
    for (const auto& s : finals)
      if (std::includes(s.begin(), s.end(), goals[g].begin(), goals[g].end())) {
        out.push_back(g);
        break;
      }
  return out;
}

}  // namespace oracle
