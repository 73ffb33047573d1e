#pragma once

#include "hap/bits.hpp"
#include "hap/cost.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hap {

struct UnknownAction : std::runtime_error {
  explicit UnknownAction(const std::string& name) : std::runtime_error("unknown action '" + name + "'") {}
};
struct Unsolvable : std::runtime_error {
  explicit Unsolvable(const std::string& what = "no valid plan exists") : std::runtime_error(what) {}
};
struct ResourceLimit : std::runtime_error {
  explicit ResourceLimit(const std::string& what = "node budget exhausted") : std::runtime_error(what) {}
};
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidPlan : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Fluent = std::string;
using TaskState = std::set<Fluent>;
using Plan = std::vector<std::string>;

struct ActionDef {
  std::string name;
  std::set<Fluent> pre;
  std::set<Fluent> add;
  std::set<Fluent> del;
  Rational cost{1};

  friend bool operator==(const ActionDef&, const ActionDef&) = default;
};

struct PlanningModel {
  std::set<Fluent> fluents;
  std::map<std::string, ActionDef> actions;
  TaskState init;
  std::set<Fluent> goal;

  friend bool operator==(const PlanningModel&, const PlanningModel&) = default;

  const ActionDef& action(const std::string& name) const {
    auto it = actions.find(name);
    if (it == actions.end()) throw UnknownAction(name);
    return it->second;
  }

  void add_action(ActionDef a) {
    for (const auto& f : a.pre) fluents.insert(f);
    for (const auto& f : a.add) fluents.insert(f);
    for (const auto& f : a.del) fluents.insert(f);
    std::string key = a.name;
    actions[key] = std::move(a);
  }

  // Throws ModelError describing the first violated invariant.
  void check() const {
    for (const auto& f : fluents)
      if (f.empty()) throw ModelError("empty fluent name");
    auto within = [&](const std::set<Fluent>& s, const std::string& where) {
      for (const auto& f : s)
        if (!fluents.count(f)) throw ModelError("fluent '" + f + "' in " + where + " is not declared");
    };
    within(init, "init");
    within(goal, "goal");
    for (const auto& [name, a] : actions) {
      if (name.empty() || name != a.name) throw ModelError("action key/name mismatch for '" + name + "'");
      if (a.cost <= 0) throw ModelError("action '" + name + "' has non-positive cost");
      within(a.pre, name + " precondition");
      within(a.add, name + " add effects");
      within(a.del, name + " delete effects");
      for (const auto& f : a.add)
        if (a.del.count(f)) throw ModelError("action '" + name + "' adds and deletes '" + f + "'");
    }
  }
};

inline bool satisfies(const TaskState& s, const std::set<Fluent>& cond) {
  return std::includes(s.begin(), s.end(), cond.begin(), cond.end());
}

inline TaskState apply_effects(const TaskState& s, const ActionDef& a) {
  TaskState out;
  for (const auto& f : s)
    if (!a.del.count(f)) out.insert(f);
  out.insert(a.add.begin(), a.add.end());
  return out;
}

// nullopt plays the role of the invalid state.
inline std::optional<TaskState> progress(const PlanningModel& m, const TaskState& s, const std::string& action_name) {
  const ActionDef& a = m.action(action_name);
  if (!satisfies(s, a.pre)) return std::nullopt;
  return apply_effects(s, a);
}

struct Validation {
  bool valid = false;
  Rational cost{0};
  int failure_index = -1;  // first failing step, -1 for a goal miss
  std::vector<TaskState> trace;  // s_0 .. s_k for the executed prefix
};

inline Validation validate_plan(const PlanningModel& m, const Plan& plan) {
  Validation v;
  TaskState s = m.init;
  v.trace.push_back(s);
  for (size_t i = 0; i < plan.size(); ++i) {
    const ActionDef& a = m.action(plan[i]);
    if (!satisfies(s, a.pre)) {
      v.failure_index = static_cast<int>(i);
      return v;
    }
    s = apply_effects(s, a);
    v.cost += a.cost;
    v.trace.push_back(s);
  }
  v.valid = satisfies(s, m.goal);
  v.failure_index = -1;
  return v;
}

// Unknown actions make a plan inexecutable in that model, so this never throws.
inline Cost plan_cost(const PlanningModel& m, const Plan& plan) {
  for (const auto& name : plan)
    if (!m.actions.count(name)) return Cost::infinity();
  Validation v = validate_plan(m, plan);
  return v.valid ? Cost(v.cost) : Cost::infinity();
}

inline bool executable(const PlanningModel& m, const Plan& plan) {
  TaskState s = m.init;
  for (const auto& name : plan) {
    auto it = m.actions.find(name);
    if (it == m.actions.end() || !satisfies(s, it->second.pre)) return false;
    s = apply_effects(s, it->second);
  }
  return true;
}

inline PlanningModel abstract_model(const PlanningModel& m, const std::set<Fluent>& lam) {
  for (const auto& f : lam)
    if (!m.fluents.count(f)) throw ModelError("abstraction fluent '" + f + "' not in model");
  auto strip = [&](const std::set<Fluent>& s) {
    std::set<Fluent> out;
    for (const auto& f : s)
      if (!lam.count(f)) out.insert(f);
    return out;
  };
  PlanningModel out;
  out.fluents = strip(m.fluents);
  out.init = strip(m.init);
  out.goal = strip(m.goal);
  for (const auto& [name, a] : m.actions) {
    ActionDef b = a;
    b.pre = strip(a.pre);
    b.add = strip(a.add);
    b.del = strip(a.del);
    out.actions[name] = b;
  }
  return out;
}

// Indexed form of a model used by the search routines. Operators are sorted by name.
struct Task {
  struct Op {
    std::string name;
    Bits pre, add, del;
    std::vector<int> pre_list, add_list;
    Rational cost;
  };

  std::vector<Fluent> fluent_names;
  std::unordered_map<Fluent, int> index;
  std::vector<Op> ops;
  std::unordered_map<std::string, int> op_index;
  Bits init;
  Bits goal;
  std::vector<int> goal_list;

  size_t nf() const { return fluent_names.size(); }

  Bits to_bits(const std::set<Fluent>& s) const {
    Bits b(nf());
    for (const auto& f : s) {
      auto it = index.find(f);
      if (it == index.end()) throw ModelError("fluent '" + f + "' unknown to task");
      b.set(static_cast<size_t>(it->second));
    }
    return b;
  }

  TaskState to_state(const Bits& b) const {
    TaskState s;
    for (auto i : b.indices()) s.insert(fluent_names[i]);
    return s;
  }

  Bits apply(const Bits& s, const Op& op) const {
    Bits out = s;
    out.subtract(op.del);
    out |= op.add;
    return out;
  }
};

inline Task compile(const PlanningModel& m) {
  Task t;
  std::set<Fluent> all = m.fluents;
  all.insert(m.init.begin(), m.init.end());
  all.insert(m.goal.begin(), m.goal.end());
  for (const auto& [_, a] : m.actions) {
    all.insert(a.pre.begin(), a.pre.end());
    all.insert(a.add.begin(), a.add.end());
    all.insert(a.del.begin(), a.del.end());
  }
  for (const auto& f : all) {
    t.index[f] = static_cast<int>(t.fluent_names.size());
    t.fluent_names.push_back(f);
  }
  for (const auto& [name, a] : m.actions) {
    Task::Op op;
    op.name = name;
    op.pre = t.to_bits(a.pre);
    op.add = t.to_bits(a.add);
    op.del = t.to_bits(a.del);
    for (auto i : op.pre.indices()) op.pre_list.push_back(static_cast<int>(i));
    for (auto i : op.add.indices()) op.add_list.push_back(static_cast<int>(i));
    op.cost = a.cost;
    t.op_index[name] = static_cast<int>(t.ops.size());
    t.ops.push_back(std::move(op));
  }
  t.init = t.to_bits(m.init);
  t.goal = t.to_bits(m.goal);
  for (auto i : t.goal.indices()) t.goal_list.push_back(static_cast<int>(i));
  return t;
}

}  // namespace hap
