#pragma once

#include "hap/combinations.hpp"
#include "hap/distance.hpp"
#include "hap/gamma.hpp"

namespace hap {

struct FoilSatisfiable : std::runtime_error {
  FoilSatisfiable() : std::runtime_error("a foil is strictly cheaper than the plan in the robot model") {}
};
struct NoLieFound : std::runtime_error {
  NoLieFound() : std::runtime_error("no lie within the edit constraints and depth") {}
};
struct NoExplanation : std::runtime_error {
  NoExplanation() : std::runtime_error("no explanation exists") {}
};

struct MRP {
  Plan plan;
  PlanningModel robot;
  PlanningModel mental;

  std::set<Fluent> fluents() const {
    std::set<Fluent> out = robot.fluents;
    out.insert(mental.fluents.begin(), mental.fluents.end());
    return out;
  }
};

// Throws InvalidPlan unless the plan is optimal in the robot model.
inline MRP make_mrp(Plan plan, PlanningModel robot, PlanningModel mental, const SearchOptions& opt = {}) {
  Cost c = plan_cost(robot, plan);
  if (c.is_inf()) throw InvalidPlan("plan is not valid in the robot model");
  if (c != optimal_cost(robot, opt)) throw InvalidPlan("plan is not optimal in the robot model");
  return {std::move(plan), std::move(robot), std::move(mental)};
}

struct ReconcileOptions {
  SearchOptions search;
  std::map<std::string, Rational> edit_costs;  // per feature key, default 1
  size_t max_expansions = 200000;
};

inline EditSpace difference_space(const MRP& mrp, const SearchOptions& opt = {}) {
  return EditSpace(gamma_map(mrp.mental), model_difference(mrp.mental, mrp.robot), mrp.fluents(), opt);
}

struct PatchExplanations {
  Explanation ppe;
  Explanation mpe;
};

inline PatchExplanations patch_explanations(const MRP& mrp) {
  auto diff = model_difference(mrp.mental, mrp.robot);
  std::set<std::string> used(mrp.plan.begin(), mrp.plan.end());
  PatchExplanations out;
  out.mpe.etype = ExplanationType::MPE;
  out.ppe.etype = ExplanationType::PPE;
  out.mpe.target_plan = out.ppe.target_plan = mrp.plan;
  out.mpe.edits = diff;
  for (const auto& e : diff)
    if (e.feature.is_action_feature() && used.count(e.feature.action)) out.ppe.edits.push_back(e);
  return out;
}

namespace detail {

inline std::vector<std::string> mask_keys(const EditSpace& space, const Bits& mask) {
  std::vector<std::string> out;
  for (auto i : mask.indices()) out.push_back(space.edit(i).feature.key());
  std::sort(out.begin(), out.end());
  return out;
}

// Uniform-cost search over edit masks (edits are only ever added). Every goal at the minimum cost is
// collected and the lexicographically least edit set (by sorted keys) wins.
template <class Key, class CostFn, class Goal, class Successors>
std::optional<Bits> mask_search(size_t n, const Key& key_of, const CostFn& cost_of, const Goal& is_goal,
                                const Successors& successors, size_t max_expansions, size_t& expanded) {
  struct Entry {
    Rational g;
    std::vector<std::string> keys;
    Bits mask;
  };
  auto keys_of = [&](const Bits& m) {
    std::vector<std::string> out;
    for (auto i : m.indices()) out.push_back(key_of(i));
    std::sort(out.begin(), out.end());
    return out;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.g != b.g) return a.g > b.g;
    return a.keys > b.keys;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::unordered_map<Bits, Rational, BitsHash> best;
  Bits root(n);
  open.push({Rational(0), {}, root});
  best[root] = 0;
  std::optional<Entry> found;
  expanded = 0;
  while (!open.empty()) {
    Entry e = open.top();
    open.pop();
    if (found && e.g > found->g) break;
    auto bi = best.find(e.mask);
    if (bi != best.end() && bi->second < e.g) continue;
    if (is_goal(e.mask)) {
      if (!found || e.keys < found->keys) found = e;
      continue;
    }
    if (found) continue;
    if (++expanded > max_expansions) throw ResourceLimit("edit search expansion budget exhausted");
    for (size_t i : successors(e.mask)) {
      if (e.mask.test(i)) continue;
      Bits m2 = e.mask;
      m2.set(i);
      Rational g2 = e.g + cost_of(i);
      auto it = best.find(m2);
      if (it != best.end() && it->second <= g2) continue;
      best[m2] = g2;
      open.push({g2, keys_of(m2), m2});
    }
  }
  if (!found) return std::nullopt;
  return found->mask;
}

template <class Goal, class Successors>
std::optional<Bits> edit_search(const EditSpace& space, const Goal& is_goal, const Successors& successors,
                                const ReconcileOptions& ro, size_t& expanded) {
  auto key_of = [&](size_t i) { return space.edit(i).feature.key(); };
  auto cost_of = [&](size_t i) {
    auto it = ro.edit_costs.find(space.edit(i).feature.key());
    return it == ro.edit_costs.end() ? Rational(1) : it->second;
  };
  return mask_search(space.size(), key_of, cost_of, is_goal, successors, ro.max_expansions, expanded);
}

inline std::vector<size_t> all_indices(const EditSpace& space) {
  std::vector<size_t> out(space.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

}  // namespace detail

// Minimally complete explanation. With use_selection, successors are limited to init/goal edits and edits on
// actions of the target plan or of the current mental-optimal plan; the search falls back to the full edit
// set if the restricted search fails.
inline Explanation mce(const MRP& mrp, bool use_selection = false, const ReconcileOptions& ro = {}) {
  EditSpace space = difference_space(mrp, ro.search);
  auto goal = [&](const Bits& m) { return space.plan_optimal_at(mrp.plan, m); };
  std::set<std::string> plan_actions(mrp.plan.begin(), mrp.plan.end());
  auto all = detail::all_indices(space);
  auto select = [&](const Bits& m) {
    std::set<std::string> relevant = plan_actions;
    try {
      auto p = optimal_plan(space.model_at(m), ro.search);
      relevant.insert(p.plan.begin(), p.plan.end());
    } catch (const Unsolvable&) {
    }
    std::vector<size_t> out;
    for (size_t i = 0; i < space.size(); ++i) {
      const auto& f = space.edit(i).feature;
      if (!f.is_action_feature() || relevant.count(f.action)) out.push_back(i);
    }
    return out;
  };
  size_t expanded = 0;
  std::optional<Bits> res;
  if (use_selection) res = detail::edit_search(space, goal, select, ro, expanded);
  size_t first = expanded;
  if (!res) res = detail::edit_search(space, goal, [&](const Bits&) { return all; }, ro, expanded);
  if (!res) throw NoExplanation();
  Explanation e;
  e.etype = ExplanationType::MCE;
  e.target_plan = mrp.plan;
  e.edits = space.selected(*res);
  e.expanded = first + expanded;
  return e;
}

// Minimally monotonic explanation: the full difference minus the largest set S of robot-model features that
// can be reverted to the mental model (together with every subset of S) while the plan stays optimal.
inline Explanation mme(const MRP& mrp, const ReconcileOptions& ro = {}) {
  EditSpace space = difference_space(mrp, ro.search);
  const size_t n = space.size();
  Bits full = space.full_mask();
  auto kept = [&](const Bits& s) {
    Bits m = full;
    m.subtract(s);
    return m;
  };
  Explanation e;
  e.etype = ExplanationType::MME;
  e.target_plan = mrp.plan;
  if (!space.plan_optimal_at(mrp.plan, full)) throw NoExplanation();

  std::vector<Bits> level{space.empty_mask()};
  std::vector<Bits> h_list;  // failing change sets; supersets are pruned
  std::vector<Bits> best_level = level;
  size_t expanded = 0;
  while (!level.empty()) {
    std::unordered_set<Bits, BitsHash> good(level.begin(), level.end());
    std::vector<Bits> next;
    std::unordered_set<Bits, BitsHash> seen;
    for (const auto& s : level) {
      size_t top = 0;
      for (auto i : s.indices()) top = i + 1;
      for (size_t i = top; i < n; ++i) {
        Bits s2 = s;
        s2.set(i);
        if (seen.count(s2)) continue;
        seen.insert(s2);
        bool pruned = false;
        for (const auto& f : h_list)
          if (s2.contains(f)) {
            pruned = true;
            break;
          }
        if (pruned) continue;
        bool subsets_ok = true;
        for (auto j : s2.indices()) {
          Bits sub = s2;
          sub.reset(j);
          if (!good.count(sub)) {
            subsets_ok = false;
            break;
          }
        }
        if (!subsets_ok) continue;
        if (++expanded > ro.max_expansions) throw ResourceLimit("MME search expansion budget exhausted");
        if (space.plan_optimal_at(mrp.plan, kept(s2)))
          next.push_back(s2);
        else
          h_list.push_back(s2);
      }
    }
    if (next.empty()) break;
    best_level = next;
    level = std::move(next);
  }
  std::optional<std::pair<std::vector<std::string>, Bits>> pick;
  for (const auto& s : best_level) {
    Bits m = kept(s);
    auto keys = detail::mask_keys(space, m);
    if (!pick || keys < pick->first) pick = std::make_pair(keys, m);
  }
  e.edits = space.selected(pick->second);
  e.expanded = expanded;
  return e;
}

// True iff every step of the plan supplies some fluent that a later step (or the goal) consumes from it.
inline bool every_step_contributes(const PlanningModel& m, const Plan& plan) {
  std::vector<const ActionDef*> acts;
  for (const auto& n : plan) {
    auto it = m.actions.find(n);
    if (it == m.actions.end()) return false;
    acts.push_back(&it->second);
  }
  std::vector<bool> contributes(plan.size(), false);
  std::map<Fluent, size_t> last;
  for (size_t j = 0; j < acts.size(); ++j) {
    for (const auto& f : acts[j]->pre) {
      auto it = last.find(f);
      if (it != last.end()) contributes[it->second] = true;
    }
    for (const auto& f : acts[j]->del) last.erase(f);
    for (const auto& f : acts[j]->add) last[f] = j;
  }
  for (const auto& f : m.goal) {
    auto it = last.find(f);
    if (it != last.end()) contributes[it->second] = true;
  }
  return std::all_of(contributes.begin(), contributes.end(), [](bool b) { return b; });
}

// Approximate MCE: goal test is C1 (plan valid), C2 (plan cheaper than before or the original mental-optimal
// plan invalidated) and C3 (every step contributes a causal link). `complete` reports whether the result
// actually makes the plan optimal.
inline Explanation approx_mce(const MRP& mrp, const ReconcileOptions& ro = {}) {
  EditSpace space = difference_space(mrp, ro.search);
  Explanation e;
  e.etype = ExplanationType::APPROX_MCE;
  e.target_plan = mrp.plan;
  if (space.plan_optimal_at(mrp.plan, space.empty_mask())) return e;
  Cost before = plan_cost(mrp.mental, mrp.plan);
  std::optional<Plan> human_plan;
  try {
    human_plan = optimal_plan(mrp.mental, ro.search).plan;
  } catch (const Unsolvable&) {
  }
  auto goal = [&](const Bits& m) {
    PlanningModel mh = space.model_at(m);
    Cost c = plan_cost(mh, mrp.plan);
    if (c.is_inf()) return false;
    bool c2 = c < before || (human_plan && plan_cost(mh, *human_plan).is_inf());
    return c2 && every_step_contributes(mh, mrp.plan);
  };
  auto all = detail::all_indices(space);
  size_t expanded = 0;
  auto res = detail::edit_search(space, goal, [&](const Bits&) { return all; }, ro, expanded);
  if (!res) throw NoExplanation();
  e.edits = space.selected(*res);
  e.expanded = expanded;
  e.complete = space.plan_optimal_at(mrp.plan, *res);
  return e;
}

// Partial-plan foil: required actions and ordering constraints between their first occurrences.
struct FoilSpec {
  std::set<std::string> actions;
  std::vector<std::pair<std::string, std::string>> before;
  Rational slack{0};
  size_t cap = 200;

  bool matches(const Plan& p) const {
    std::map<std::string, size_t> first;
    for (size_t i = 0; i < p.size(); ++i) first.emplace(p[i], i);
    for (const auto& a : actions)
      if (!first.count(a)) return false;
    for (const auto& [a, b] : before) {
      auto ia = first.find(a), ib = first.find(b);
      if (ia == first.end() || ib == first.end() || ia->second >= ib->second) return false;
    }
    return true;
  }
};

// Concrete foils consistent with the spec in the mental model: the cheapest consistent plans up to
// cheapest + slack, at most spec.cap of them.
inline std::vector<Plan> expand_foil_spec(const FoilSpec& spec, const PlanningModel& mental,
                                          const Rational& horizon, const SearchOptions& opt = {}) {
  PlanSet all = enumerate_valid_bounded(mental, horizon, 100000, opt);
  std::vector<std::pair<Rational, Plan>> hits;
  for (const auto& p : all.plans)
    if (spec.matches(p)) hits.emplace_back(plan_cost(mental, p).value(), p);
  if (hits.empty()) return {};
  Rational lo = hits.front().first;
  for (const auto& h : hits) lo = std::min(lo, h.first);
  std::sort(hits.begin(), hits.end());
  std::vector<Plan> out;
  for (const auto& [c, p] : hits) {
    if (c > lo + spec.slack || out.size() >= spec.cap) break;
    out.push_back(p);
  }
  return out;
}

// Smallest edit set after which the plan is valid and no foil is strictly cheaper (inexecutable foils count
// as refuted).
inline Explanation contrastive_explain(const MRP& mrp, const std::vector<Plan>& foils, const ReconcileOptions& ro = {}) {
  if (foils.empty()) throw std::invalid_argument("no foils given");
  Cost pc = plan_cost(mrp.robot, mrp.plan);
  for (const auto& f : foils)
    if (plan_cost(mrp.robot, f) < pc) throw FoilSatisfiable();
  EditSpace space = difference_space(mrp, ro.search);
  auto goal = [&](const Bits& m) {
    PlanningModel mh = space.model_at(m);
    Cost c = plan_cost(mh, mrp.plan);
    if (c.is_inf()) return false;
    for (const auto& f : foils)
      if (plan_cost(mh, f) < c) return false;
    return true;
  };
  auto all = detail::all_indices(space);
  size_t expanded = 0;
  auto res = detail::edit_search(space, goal, [&](const Bits&) { return all; }, ro, expanded);
  if (!res) throw NoExplanation();
  Explanation e;
  e.etype = ExplanationType::CONTRASTIVE;
  e.target_plan = mrp.plan;
  e.edits = space.selected(*res);
  e.expanded = expanded;
  return e;
}

inline Explanation contrastive_explain(const MRP& mrp, const FoilSpec& spec, const ReconcileOptions& ro = {}) {
  Rational horizon = std::max(plan_cost(mrp.robot, mrp.plan).value(), Rational(1)) * 2 + spec.slack;
  auto foils = expand_foil_spec(spec, mrp.mental, horizon, ro.search);
  if (foils.empty()) throw std::invalid_argument("foil spec matches no plan in the mental model");
  return contrastive_explain(mrp, foils, ro);
}

enum class LieMode { omission_only, unconstrained };

// Edits that need not agree with the robot model. Unconstrained: add or remove any init/goal/pre/add/del
// feature over the joint vocabulary. Omission-only: remove features of the mental model.
inline Explanation lie_explain(const MRP& mrp, LieMode mode, size_t max_depth = 3, const ReconcileOptions& ro = {}) {
  auto gh = gamma_map(mrp.mental);
  std::vector<Edit> universe;
  if (mode == LieMode::omission_only) {
    for (const auto& f : gh)
      if (f.kind != FeatureKind::cost) universe.push_back({false, f});
  } else {
    auto fl = mrp.fluents();
    std::set<std::string> acts;
    for (const auto& [n, _] : mrp.robot.actions) acts.insert(n);
    for (const auto& [n, _] : mrp.mental.actions) acts.insert(n);
    std::vector<Feature> cand;
    for (const auto& f : fl) {
      cand.push_back(Feature::init(f));
      cand.push_back(Feature::goal(f));
      for (const auto& a : acts) {
        cand.push_back(Feature::pre(a, f));
        cand.push_back(Feature::add(a, f));
        cand.push_back(Feature::del(a, f));
      }
    }
    for (const auto& [n, a] : mrp.robot.actions)
      if (!gh.count(Feature::cost_of(n, a.cost))) cand.push_back(Feature::cost_of(n, a.cost));
    for (const auto& f : cand) universe.push_back({!gh.count(f), f});
  }
  EditSpace space(gh, universe, mrp.fluents(), ro.search);
  Explanation e;
  e.etype = ExplanationType::LIE;
  e.target_plan = mrp.plan;
  if (space.plan_optimal_at(mrp.plan, space.empty_mask())) return e;
  // iterative deepening over edit-set size; combinations in lexicographic order of sorted keys
  size_t expanded = 0;
  for (size_t depth = 1; depth <= std::min(max_depth, space.size()); ++depth) {
    bool found = for_each_combination(space.size(), depth, [&](const std::vector<size_t>& idx) {
      Bits m = space.empty_mask();
      for (auto i : idx) m.set(i);
      if (++expanded > ro.max_expansions) throw ResourceLimit("lie search expansion budget exhausted");
      if (!space.plan_optimal_at(mrp.plan, m)) return false;
      e.edits = space.selected(m);
      return true;
    });
    if (found) {
      e.expanded = expanded;
      return e;
    }
  }
  throw NoLieFound();
}

}  // namespace hap
