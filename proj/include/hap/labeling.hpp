#pragma once

#include "hap/model.hpp"

namespace hap {

struct EmptyTraining : std::invalid_argument {
  EmptyTraining() : std::invalid_argument("no labeled traces") {}
};

enum class FeatureMode { action_only, action_delta };

// Key of a plan step: the action name, optionally followed by the sorted fluents it made true.
inline std::string step_key(const std::string& action, const TaskState& before, const TaskState& after,
                            FeatureMode mode) {
  if (mode == FeatureMode::action_only) return action;
  std::string k = action + "|";
  bool first = true;
  for (const auto& f : after) {
    if (before.count(f)) continue;
    if (!first) k += ",";
    k += f;
    first = false;
  }
  return k;
}

// Keys of every step of an executable plan.
inline std::vector<std::string> step_keys(const PlanningModel& m, const Plan& plan, FeatureMode mode) {
  std::vector<std::string> out;
  TaskState s = m.init;
  for (const auto& a : plan) {
    auto next = progress(m, s, a);
    if (!next) throw InvalidPlan("plan inexecutable at '" + a + "'");
    out.push_back(step_key(a, s, *next, mode));
    s = std::move(*next);
  }
  return out;
}

struct LabelingModel {
  FeatureMode mode = FeatureMode::action_delta;
  std::map<std::string, Rational> table;         // step key -> P(explicable)
  std::map<std::string, Rational> action_table;  // action name -> P(explicable)
  Rational default_prob{1, 2};
  Rational threshold{1, 2};

  Rational prob(const std::string& key) const {
    auto it = table.find(key);
    return it == table.end() ? default_prob : it->second;
  }
  Rational action_prob(const std::string& action) const {
    auto it = action_table.find(action);
    if (it != action_table.end()) return it->second;
    return prob(action);
  }
  bool explicable(const std::string& key) const { return prob(key) >= threshold; }
};

struct LabeledTrace {
  Plan plan;
  std::vector<bool> labels;  // true = explicable
  std::vector<std::string> keys;  // optional precomputed step keys; derived from the model when empty
};

// Frequency estimate of P(explicable | key) from labeled traces.
inline LabelingModel learn_labeling(const std::vector<LabeledTrace>& traces, const PlanningModel* model,
                                   FeatureMode mode, Rational default_prob = Rational(1, 2)) {
  if (traces.empty()) throw EmptyTraining();
  std::map<std::string, std::pair<long long, long long>> cnt, act;
  for (const auto& t : traces) {
    if (t.labels.size() != t.plan.size()) throw std::invalid_argument("label count differs from plan length");
    std::vector<std::string> keys = t.keys;
    if (keys.empty()) {
      if (mode == FeatureMode::action_only || !model)
        keys = t.plan;
      else
        keys = step_keys(*model, t.plan, mode);
    }
    for (size_t i = 0; i < t.plan.size(); ++i) {
      auto& c = cnt[keys[i]];
      auto& a = act[t.plan[i]];
      c.second++;
      a.second++;
      if (t.labels[i]) {
        c.first++;
        a.first++;
      }
    }
  }
  LabelingModel lm;
  lm.mode = mode;
  lm.default_prob = default_prob;
  for (const auto& [k, c] : cnt) lm.table[k] = Rational(c.first, c.second);
  for (const auto& [k, c] : act) lm.action_table[k] = Rational(c.first, c.second);
  return lm;
}

}  // namespace hap
