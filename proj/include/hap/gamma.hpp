#pragma once

#include "hap/planner.hpp"

#include <cctype>
#include <mutex>
#include <shared_mutex>

namespace hap {

struct MalformedEdit : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class FeatureKind { init, goal, pre, add, del, cost };

// One model-feature proposition. Features are ordered by their rendered key.
struct Feature {
  FeatureKind kind = FeatureKind::init;
  std::string action;  // empty for init/goal features
  Fluent fluent;       // empty for cost features
  Rational cost{0};

  static Feature init(const Fluent& f) { return {FeatureKind::init, "", f, 0}; }
  static Feature goal(const Fluent& f) { return {FeatureKind::goal, "", f, 0}; }
  static Feature pre(const std::string& a, const Fluent& f) { return {FeatureKind::pre, a, f, 0}; }
  static Feature add(const std::string& a, const Fluent& f) { return {FeatureKind::add, a, f, 0}; }
  static Feature del(const std::string& a, const Fluent& f) { return {FeatureKind::del, a, f, 0}; }
  static Feature cost_of(const std::string& a, const Rational& c) { return {FeatureKind::cost, a, "", c}; }

  std::string key() const {
    switch (kind) {
      case FeatureKind::init: return "init-has-" + fluent;
      case FeatureKind::goal: return "goal-has-" + fluent;
      case FeatureKind::pre: return action + "-has-precondition-" + fluent;
      case FeatureKind::add: return action + "-has-add-effect-" + fluent;
      case FeatureKind::del: return action + "-has-del-effect-" + fluent;
      case FeatureKind::cost: return action + "-has-cost-" + to_string(cost);
    }
    return "";
  }

  bool is_action_feature() const { return kind != FeatureKind::init && kind != FeatureKind::goal; }

  friend bool operator==(const Feature& a, const Feature& b) { return a.key() == b.key(); }
  friend bool operator<(const Feature& a, const Feature& b) { return a.key() < b.key(); }
};

inline Feature parse_feature(const std::string& text) {
  auto starts = [&](const std::string& p) { return text.rfind(p, 0) == 0; };
  if (starts("init-has-") && text.size() > 9) return Feature::init(text.substr(9));
  if (starts("goal-has-") && text.size() > 9) return Feature::goal(text.substr(9));
  struct Marker {
    const char* text;
    FeatureKind kind;
  };
  for (auto m : {Marker{"-has-precondition-", FeatureKind::pre}, Marker{"-has-add-effect-", FeatureKind::add},
                 Marker{"-has-del-effect-", FeatureKind::del}, Marker{"-has-cost-", FeatureKind::cost}}) {
    std::string mk = m.text;
    auto pos = text.find(mk);
    if (pos == std::string::npos || pos == 0 || pos + mk.size() >= text.size()) continue;
    std::string a = text.substr(0, pos);
    std::string rest = text.substr(pos + mk.size());
    if (m.kind == FeatureKind::cost) {
      try {
        return Feature::cost_of(a, parse_rational(rest));
      } catch (const std::exception&) {
        throw MalformedEdit("bad cost in feature '" + text + "'");
      }
    }
    return Feature{m.kind, a, rest, 0};
  }
  throw MalformedEdit("unrecognized feature '" + text + "'");
}

using ModelFeatureSet = std::set<Feature>;

inline ModelFeatureSet gamma_map(const PlanningModel& m) {
  ModelFeatureSet out;
  for (const auto& f : m.init) out.insert(Feature::init(f));
  for (const auto& f : m.goal) out.insert(Feature::goal(f));
  for (const auto& [name, a] : m.actions) {
    for (const auto& f : a.pre) out.insert(Feature::pre(name, f));
    for (const auto& f : a.add) out.insert(Feature::add(name, f));
    for (const auto& f : a.del) out.insert(Feature::del(name, f));
    out.insert(Feature::cost_of(name, a.cost));
  }
  return out;
}

// Decodes a feature set. An action exists iff it carries a cost feature; pre/add/del features of actions
// without one are dormant and ignored. `fluents` extends the decoded fluent set (pass the original F to
// round-trip models with unused fluents).
inline PlanningModel gamma_inverse(const ModelFeatureSet& features, const std::set<Fluent>& fluents = {}) {
  PlanningModel m;
  m.fluents = fluents;
  for (const auto& ft : features) {
    if (ft.kind != FeatureKind::cost) continue;
    if (m.actions.count(ft.action)) throw MalformedEdit("action '" + ft.action + "' has two cost features");
    if (ft.cost <= 0) throw MalformedEdit("action '" + ft.action + "' has non-positive cost");
    ActionDef a;
    a.name = ft.action;
    a.cost = ft.cost;
    m.actions[a.name] = a;
  }
  for (const auto& ft : features) {
    switch (ft.kind) {
      case FeatureKind::init:
        m.init.insert(ft.fluent);
        m.fluents.insert(ft.fluent);
        break;
      case FeatureKind::goal:
        m.goal.insert(ft.fluent);
        m.fluents.insert(ft.fluent);
        break;
      case FeatureKind::pre:
      case FeatureKind::add:
      case FeatureKind::del: {
        m.fluents.insert(ft.fluent);
        auto it = m.actions.find(ft.action);
        if (it == m.actions.end()) break;
        auto& slot = ft.kind == FeatureKind::pre ? it->second.pre
                     : ft.kind == FeatureKind::add ? it->second.add
                                                   : it->second.del;
        slot.insert(ft.fluent);
        break;
      }
      case FeatureKind::cost: break;
    }
  }
  for (auto& [name, a] : m.actions)
    for (const auto& f : a.add)
      if (a.del.count(f)) a.del.erase(f);  // add wins, matching apply_effects
  return m;
}

struct Edit {
  bool add = true;
  Feature feature;
  bool annotation = false;  // resolves an uncertain (annotated) feature rather than a known one

  std::string key() const {
    return std::string(add ? "add-" : "remove-") + (annotation ? "annot:" : "known:") + feature.key();
  }
  friend bool operator==(const Edit& a, const Edit& b) {
    return a.add == b.add && a.annotation == b.annotation && a.feature == b.feature;
  }
  friend bool operator<(const Edit& a, const Edit& b) {
    if (a.feature.key() != b.feature.key()) return a.feature < b.feature;
    if (a.annotation != b.annotation) return a.annotation < b.annotation;
    return a.add < b.add;
  }
};

// Applies edits to a feature set. Adding a cost feature replaces the action's current cost.
inline void apply_edits(ModelFeatureSet& fs, const std::vector<Edit>& edits) {
  for (const auto& e : edits)
    if (!e.add) fs.erase(e.feature);
  for (const auto& e : edits) {
    if (!e.add) continue;
    if (e.feature.kind == FeatureKind::cost) {
      for (auto it = fs.begin(); it != fs.end();) {
        if (it->kind == FeatureKind::cost && it->action == e.feature.action)
          it = fs.erase(it);
        else
          ++it;
      }
    }
    fs.insert(e.feature);
  }
}

// Edit set moving `from` to `to`: additions of Γ(to) \ Γ(from) and removals of Γ(from) \ Γ(to). A cost that
// differs is expressed by the addition alone.
inline std::vector<Edit> model_difference(const PlanningModel& from, const PlanningModel& to) {
  auto gf = gamma_map(from);
  auto gt = gamma_map(to);
  std::vector<Edit> out;
  for (const auto& f : gt)
    if (!gf.count(f)) out.push_back({true, f});
  for (const auto& f : gf) {
    if (gt.count(f)) continue;
    if (f.kind == FeatureKind::cost && to.actions.count(f.action)) continue;
    out.push_back({false, f});
  }
  std::sort(out.begin(), out.end());
  return out;
}

enum class ExplanationType { PPE, MPE, MCE, MME, APPROX_MCE, CONTRASTIVE, LIE, CONFORMANT, CONDITIONAL, ANYTIME };

inline std::string to_string(ExplanationType t) {
  switch (t) {
    case ExplanationType::PPE: return "PPE";
    case ExplanationType::MPE: return "MPE";
    case ExplanationType::MCE: return "MCE";
    case ExplanationType::MME: return "MME";
    case ExplanationType::APPROX_MCE: return "APPROX_MCE";
    case ExplanationType::CONTRASTIVE: return "CONTRASTIVE";
    case ExplanationType::LIE: return "LIE";
    case ExplanationType::CONFORMANT: return "CONFORMANT";
    case ExplanationType::CONDITIONAL: return "CONDITIONAL";
    case ExplanationType::ANYTIME: return "ANYTIME";
  }
  return "?";
}

struct Explanation {
  std::vector<Edit> edits;
  ExplanationType etype = ExplanationType::MCE;
  Plan target_plan;
  bool complete = true;  // false when an approximate goal test could not certify optimality
  size_t expanded = 0;

  size_t size() const { return edits.size(); }
  std::set<std::string> keys() const {
    std::set<std::string> out;
    for (const auto& e : edits) out.insert(e.feature.key());
    return out;
  }
};

inline PlanningModel apply_explanation(const PlanningModel& mental, const std::vector<Edit>& edits,
                                       const std::set<Fluent>& extra_fluents = {}) {
  auto fs = gamma_map(mental);
  apply_edits(fs, edits);
  std::set<Fluent> fl = mental.fluents;
  fl.insert(extra_fluents.begin(), extra_fluents.end());
  return gamma_inverse(fs, fl);
}

inline PlanningModel apply_explanation(const PlanningModel& mental, const Explanation& e) {
  return apply_explanation(mental, e.edits);
}

inline std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// "MOVE_LOC1_LOC2-has-precondition-HAND-TUCKED" style line body.
inline std::string render_feature(const Feature& f) {
  switch (f.kind) {
    case FeatureKind::init: return "INIT-has-add-effect-" + upper(f.fluent);
    case FeatureKind::goal: return "GOAL-has-precondition-" + upper(f.fluent);
    case FeatureKind::pre: return upper(f.action) + "-has-precondition-" + upper(f.fluent);
    case FeatureKind::add: return upper(f.action) + "-has-add-effect-" + upper(f.fluent);
    case FeatureKind::del: return upper(f.action) + "-has-del-effect-" + upper(f.fluent);
    case FeatureKind::cost: return upper(f.action) + "-has-cost-" + to_string(f.cost);
  }
  return "";
}

inline std::string render_explanation(const Explanation& e) {
  std::string out;
  for (const auto& ed : e.edits) out += "Explanation >> " + std::string(ed.add ? "" : "NOT ") + render_feature(ed.feature) + "\n";
  return out;
}

// "clear_passage-has-precondition-hand_capable" style with INIT/GOAL pseudo-actions, case preserved.
inline std::string render_feature_plain(const Feature& f) {
  switch (f.kind) {
    case FeatureKind::init: return "INIT-has-add-effect-" + f.fluent;
    case FeatureKind::goal: return "GOAL-has-precondition-" + f.fluent;
    default: return f.key();
  }
}

// "remove-known-INIT-has-add-effect-hand_capable" / "add-annot-..." lines.
inline std::string render_edit_tagged(const Edit& e) {
  return std::string(e.add ? "add-" : "remove-") + (e.annotation ? "annot-" : "known-") +
         render_feature_plain(e.feature);
}

// Edit lattice over a base feature set: a state is a bitmask over `edits`. Optimal costs are memoized per
// mask; the memo is safe to share across threads.
class EditSpace {
 public:
  EditSpace(ModelFeatureSet base, std::vector<Edit> edits, std::set<Fluent> fluents, SearchOptions opt = {})
      : base_(std::move(base)), edits_(std::move(edits)), fluents_(std::move(fluents)), opt_(opt) {
    std::sort(edits_.begin(), edits_.end());
    edits_.erase(std::unique(edits_.begin(), edits_.end()), edits_.end());
  }

  size_t size() const { return edits_.size(); }
  const std::vector<Edit>& edits() const { return edits_; }
  const Edit& edit(size_t i) const { return edits_[i]; }
  Bits empty_mask() const { return Bits(edits_.size()); }
  Bits full_mask() const {
    Bits b(edits_.size());
    for (size_t i = 0; i < edits_.size(); ++i) b.set(i);
    return b;
  }

  std::vector<Edit> selected(const Bits& mask) const {
    std::vector<Edit> out;
    for (auto i : mask.indices()) out.push_back(edits_[i]);
    return out;
  }

  PlanningModel model_at(const Bits& mask) const {
    auto fs = base_;
    apply_edits(fs, selected(mask));
    return gamma_inverse(fs, fluents_);
  }

  Cost optimal_cost_at(const Bits& mask) const {
    {
      std::shared_lock lock(mu_);
      auto it = memo_.find(mask);
      if (it != memo_.end()) return it->second;
    }
    Cost c = optimal_cost(model_at(mask), opt_);
    std::unique_lock lock(mu_);
    memo_.emplace(mask, c);
    ++evaluations_;
    return c;
  }

  // C(plan, M_mask) == C*_{M_mask} with a finite plan cost.
  bool plan_optimal_at(const Plan& plan, const Bits& mask) const {
    Cost c = plan_cost(model_at(mask), plan);
    if (c.is_inf()) return false;
    return c == optimal_cost_at(mask);
  }

  size_t evaluations() const { return evaluations_; }

 private:
  ModelFeatureSet base_;
  std::vector<Edit> edits_;
  std::set<Fluent> fluents_;
  SearchOptions opt_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<Bits, Cost, BitsHash> memo_;
  mutable size_t evaluations_ = 0;
};

}  // namespace hap
