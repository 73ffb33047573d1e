#pragma once

#include "hap/gamma.hpp"
#include "hap/planner.hpp"
#include "hap/scores.hpp"

#include <cmath>
#include <queue>

namespace hap {

struct VocabularyMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline const std::string kAugInit = "I*";
inline const std::string kAugGoal = "G*";
inline const std::string kAugExplaining = "explaining*";
inline const std::string kStartAction = "a0*";
inline const std::string kFinishAction = "a_inf*";

inline std::string belief_fluent(const Fluent& f) { return "B(" + f + ")"; }

// guard -> fluent; holds when the guard is absent or false, or the fluent is true
struct GuardedLiteral {
  Fluent fluent;
  std::optional<Fluent> guard;

  bool holds(const TaskState& s) const { return (guard && !s.count(*guard)) || s.count(fluent); }
  friend bool operator==(const GuardedLiteral&, const GuardedLiteral&) = default;
};

struct MetaFluent {
  std::string name;  // mu+(key) or mu-(key)
  bool positive;     // feature of the robot model missing from the mental model
  Feature feature;

  Edit edit() const { return {positive, feature}; }
};

struct AugmentedAction {
  std::string name;
  enum class Kind { task, explanatory, start, finish } kind = Kind::task;
  std::set<Fluent> pre;                     // unconditional
  std::vector<GuardedLiteral> guarded_pre;  // belief conditions
  std::set<Fluent> add, del;                // unconditional
  std::vector<GuardedLiteral> guarded_add, guarded_del;
  Rational cost{0};
  std::optional<size_t> meta;  // explanatory actions: index of the meta fluent they resolve
};

struct AugmentedModel {
  std::set<Fluent> task_fluents, belief_fluents, meta_fluent_names;
  std::vector<MetaFluent> meta;
  std::vector<AugmentedAction> actions;  // task actions, explanatory actions, then a0 and a_inf
  TaskState init{kAugInit};
  std::set<Fluent> goal{kAugGoal};
  bool observe_execution = false;

  const AugmentedAction& action(const std::string& name) const {
    for (const auto& a : actions)
      if (a.name == name) return a;
    throw UnknownAction(name);
  }

  bool applicable(const TaskState& s, const AugmentedAction& a) const {
    if (!satisfies(s, a.pre)) return false;
    for (const auto& g : a.guarded_pre)
      if (!g.holds(s)) return false;
    return true;
  }

  // Conditional effects are evaluated in the state before the action; deletes precede adds.
  TaskState apply(const TaskState& s, const AugmentedAction& a) const {
    TaskState out = s;
    std::vector<Fluent> adds, dels;
    auto fires = [&](const GuardedLiteral& g) { return !g.guard || s.count(*g.guard); };
    for (const auto& g : a.guarded_del)
      if (fires(g)) dels.push_back(g.fluent);
    for (const auto& g : a.guarded_add)
      if (fires(g)) adds.push_back(g.fluent);
    for (const auto& f : a.del) out.erase(f);
    for (const auto& f : dels) out.erase(f);
    for (const auto& f : a.add) out.insert(f);
    for (const auto& f : adds) out.insert(f);
    return out;
  }

  void check() const {
    for (const auto& a : actions) {
      auto check_guards = [&](const std::vector<GuardedLiteral>& gs) {
        for (const auto& g : gs)
          if (g.guard && !meta_fluent_names.count(*g.guard))
            throw ModelError("guard '" + *g.guard + "' of '" + a.name + "' is not a declared meta fluent");
      };
      check_guards(a.guarded_pre);
      check_guards(a.guarded_add);
      check_guards(a.guarded_del);
    }
  }
};

inline std::string meta_name(bool positive, const Feature& f) {
  return std::string(positive ? "mu+(" : "mu-(") + f.key() + ")";
}

inline std::string explanatory_name(bool positive, const Feature& f) {
  return std::string(positive ? "explain-mu+-" : "explain-mu--") + f.key();
}

// Compiles the robot model, the mental model and per-feature message costs into one augmented model whose
// plans interleave belief-changing explanatory actions with guarded task actions. Cost features are not
// explainable; both models must declare the same fluents and action names.
inline AugmentedModel compile_augmented(const PlanningModel& robot, const PlanningModel& mental,
                                        const std::map<std::string, Rational>& message_costs = {},
                                        bool observe_execution = false, const Rational& default_message_cost = 1) {
  if (robot.fluents != mental.fluents) throw VocabularyMismatch("robot and mental models declare different fluents");
  for (const auto& [n, _] : robot.actions)
    if (!mental.actions.count(n)) throw VocabularyMismatch("action '" + n + "' is missing from the mental model");
  for (const auto& [n, _] : mental.actions)
    if (!robot.actions.count(n)) throw VocabularyMismatch("action '" + n + "' is missing from the robot model");

  AugmentedModel am;
  am.observe_execution = observe_execution;
  am.task_fluents = robot.fluents;
  for (const auto& f : robot.fluents) am.belief_fluents.insert(belief_fluent(f));

  std::map<std::string, size_t> meta_of;  // feature key -> meta index
  for (const auto& e : model_difference(mental, robot)) {
    if (e.feature.kind == FeatureKind::cost) continue;
    MetaFluent mf{meta_name(e.add, e.feature), e.add, e.feature};
    meta_of[e.feature.key()] = am.meta.size();
    am.meta_fluent_names.insert(mf.name);
    am.meta.push_back(mf);
  }
  auto guard_of = [&](const Feature& f) -> std::optional<Fluent> {
    auto it = meta_of.find(f.key());
    if (it == meta_of.end()) return std::nullopt;
    return am.meta[it->second].name;
  };
  // belief literals for the union of a robot and a mental condition; differing members are guarded
  auto guarded = [&](const std::set<Fluent>& r, const std::set<Fluent>& h, auto make_feature) {
    std::vector<GuardedLiteral> out;
    std::set<Fluent> all = r;
    all.insert(h.begin(), h.end());
    for (const auto& f : all) {
      if (r.count(f) && h.count(f)) {
        out.push_back({belief_fluent(f), std::nullopt});
      } else {
        auto g = guard_of(make_feature(f));
        if (!g) throw ModelError("no meta fluent for differing feature '" + make_feature(f).key() + "'");
        out.push_back({belief_fluent(f), g});
      }
    }
    return out;
  };

  for (const auto& [name, ar] : robot.actions) {
    const ActionDef& ah = mental.actions.at(name);
    AugmentedAction a;
    a.name = name;
    a.kind = AugmentedAction::Kind::task;
    a.pre = ar.pre;
    a.guarded_pre = guarded(ar.pre, ah.pre, [&](const Fluent& f) { return Feature::pre(name, f); });
    a.add = ar.add;
    a.del = ar.del;
    a.del.insert(kAugExplaining);
    if (observe_execution) {
      for (const auto& f : ar.add) a.guarded_add.push_back({belief_fluent(f), std::nullopt});
      for (const auto& f : ar.del) a.guarded_del.push_back({belief_fluent(f), std::nullopt});
    } else {
      a.guarded_add = guarded(ar.add, ah.add, [&](const Fluent& f) { return Feature::add(name, f); });
      a.guarded_del = guarded(ar.del, ah.del, [&](const Fluent& f) { return Feature::del(name, f); });
    }
    a.cost = ar.cost;
    am.actions.push_back(std::move(a));
  }

  for (size_t i = 0; i < am.meta.size(); ++i) {
    const MetaFluent& mf = am.meta[i];
    AugmentedAction a;
    a.name = explanatory_name(mf.positive, mf.feature);
    a.kind = AugmentedAction::Kind::explanatory;
    a.meta = i;
    a.pre = {kAugExplaining};
    if (mf.positive) {
      a.add.insert(mf.name);
    } else {
      a.del.insert(mf.name);
    }
    // initial-state facts are told directly as beliefs
    if (mf.feature.kind == FeatureKind::init) {
      if (mf.positive)
        a.add.insert(belief_fluent(mf.feature.fluent));
      else
        a.del.insert(belief_fluent(mf.feature.fluent));
    }
    auto it = message_costs.find(mf.feature.key());
    a.cost = it == message_costs.end() ? default_message_cost : it->second;
    am.actions.push_back(std::move(a));
  }

  AugmentedAction a0;
  a0.name = kStartAction;
  a0.kind = AugmentedAction::Kind::start;
  a0.pre = {kAugInit};
  a0.del = {kAugInit};
  a0.add = robot.init;
  for (const auto& f : mental.init) a0.add.insert(belief_fluent(f));
  for (const auto& mf : am.meta)
    if (!mf.positive) a0.add.insert(mf.name);
  a0.add.insert(kAugExplaining);
  am.actions.push_back(std::move(a0));

  AugmentedAction fin;
  fin.name = kFinishAction;
  fin.kind = AugmentedAction::Kind::finish;
  fin.pre = robot.goal;
  fin.guarded_pre = guarded(robot.goal, mental.goal, [](const Fluent& f) { return Feature::goal(f); });
  fin.add = {kAugGoal};
  am.actions.push_back(std::move(fin));
  am.check();
  return am;
}

enum class IeMap { linear, exponential };
enum class BalanceMode { optimal_balanced, perfectly_explicable, perfectly_explicable_optimal };

inline std::string to_string(BalanceMode m) {
  switch (m) {
    case BalanceMode::optimal_balanced: return "optimal-balanced";
    case BalanceMode::perfectly_explicable: return "perfectly-explicable";
    case BalanceMode::perfectly_explicable_optimal: return "perfectly-explicable-optimal";
  }
  return "?";
}

inline BalanceMode balance_mode_from_string(const std::string& s) {
  for (auto m : {BalanceMode::optimal_balanced, BalanceMode::perfectly_explicable,
                 BalanceMode::perfectly_explicable_optimal})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown balance mode '" + s + "'");
}

struct BalanceWeights {
  Rational alpha{1}, beta{1}, gamma{1};
  IeMap ie_map = IeMap::linear;

  void check() const {
    if (alpha < 0 || beta < 0 || gamma < 0) throw std::invalid_argument("weights must be non-negative");
    if (alpha == 0 && beta == 0 && gamma == 0) throw std::invalid_argument("weights must not all be zero");
  }

  // Penalty of a cost gap to the optimum; exponential is e^gap - 1 so that a perfectly explicable plan pays 0.
  double penalty(const Rational& gap) const {
    double d = to_double(gap);
    return ie_map == IeMap::linear ? d : std::expm1(d);
  }
};

struct BalanceOptions {
  std::map<std::string, Rational> message_costs;  // feature key -> cost
  Rational default_message_cost{1};
  bool observe_execution = false;
  size_t node_budget = 1000000;
  SearchOptions search;
};

struct BalancedSolution {
  Plan augmented_plan;
  Plan task_fragment;
  Explanation explanation;
  Rational plan_cost{0};
  Rational comm_cost{0};
  double ie_penalty = 0;
  double objective = 0;
  size_t expanded = 0;
};

// Task-level fragment and explanation of an augmented plan.
inline std::pair<Plan, std::vector<Edit>> extract_fragments(const AugmentedModel& am, const Plan& augmented) {
  Plan t;
  std::vector<Edit> e;
  for (const auto& n : augmented) {
    const auto& a = am.action(n);
    if (a.kind == AugmentedAction::Kind::task) t.push_back(n);
    if (a.kind == AugmentedAction::Kind::explanatory) e.push_back(am.meta[*a.meta].edit());
  }
  std::sort(e.begin(), e.end());
  return {t, e};
}

struct OptimalityDelta {
  Cost value;  // +inf when every valid plan costs the optimum
  bool exact = true;
};

// Gap between the optimal cost and the next distinct cost of any valid (not necessarily loop-free) plan.
// Keeps the two smallest distinct path costs per state.
inline OptimalityDelta optimality_delta(const PlanningModel& m, size_t node_budget = 1000000) {
  Task t = compile(m);
  struct Entry {
    Rational g;
    size_t order;
    Bits s;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.g != b.g) return a.g > b.g;
    return a.order > b.order;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::unordered_map<Bits, std::vector<Rational>, BitsHash> labels;
  size_t order = 0, popped = 0;
  open.push({Rational(0), order++, t.init});
  std::optional<Rational> first;
  while (!open.empty()) {
    Entry e = open.top();
    open.pop();
    auto& l = labels[e.s];
    if (l.size() >= 2 || (!l.empty() && l.back() == e.g)) continue;
    l.push_back(e.g);
    if (e.s.contains(t.goal)) {
      if (!first) {
        first = e.g;
      } else if (e.g > *first) {
        return {Cost(e.g - *first), true};
      }
    }
    if (++popped > node_budget) {
      if (!first) throw ResourceLimit("optimality delta search budget exhausted");
      std::set<Rational> costs;
      for (const auto& op : t.ops) costs.insert(op.cost);
      Rational lb = costs.size() >= 2 ? *std::next(costs.begin()) - *costs.begin() : *costs.begin();
      return {Cost(lb), false};
    }
    for (const auto& op : t.ops)
      if (e.s.contains(op.pre)) open.push({e.g + op.cost, order++, t.apply(e.s, op)});
  }
  if (!first) throw Unsolvable("model is unsolvable");
  return {Cost::infinity(), true};
}

namespace detail {

struct BalancedSearch {
  const PlanningModel& robot;
  const PlanningModel& mental;
  const AugmentedModel& am;
  BalanceWeights w;
  BalanceMode mode;
  double message_scale = 1;
  const BalanceOptions& bo;
  std::map<std::vector<bool>, Cost> cstar_cache;

  Cost cstar_for(const std::vector<bool>& used) {
    auto it = cstar_cache.find(used);
    if (it != cstar_cache.end()) return it->second;
    std::vector<Edit> edits;
    for (size_t i = 0; i < used.size(); ++i)
      if (used[i]) edits.push_back(am.meta[i].edit());
    Cost c = optimal_cost(apply_explanation(mental, edits), bo.search);
    cstar_cache.emplace(used, c);
    return c;
  }

  std::optional<BalancedSolution> run() {
    struct Node {
      TaskState s;
      std::vector<bool> used;
      size_t last_meta = 0;  // explanatory actions are taken in increasing meta order
      Rational task_cost{0}, comm_cost{0};
      double g = 0;
      Plan plan;
      double penalty = 0;
    };
    struct Entry {
      double g;
      size_t order;
      std::shared_ptr<Node> n;
    };
    auto worse = [](const Entry& a, const Entry& b) {
      if (std::abs(a.g - b.g) > 1e-12) return a.g > b.g;
      return a.order > b.order;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
    std::set<std::pair<TaskState, std::vector<bool>>> closed;
    size_t order = 0, expanded = 0;
    auto root = std::make_shared<Node>();
    root->s = am.init;
    root->used.assign(am.meta.size(), false);
    open.push({0, order++, root});
    const double alpha = to_double(w.alpha), beta = to_double(w.beta), gamma = to_double(w.gamma);
    while (!open.empty()) {
      Entry e = open.top();
      open.pop();
      const Node& n = *e.n;
      if (n.s.count(kAugGoal)) {
        BalancedSolution sol;
        sol.augmented_plan = n.plan;
        auto [t, edits] = extract_fragments(am, n.plan);
        sol.task_fragment = t;
        sol.explanation.edits = edits;
        sol.explanation.etype = ExplanationType::MCE;
        sol.explanation.target_plan = t;
        sol.explanation.expanded = expanded;
        sol.plan_cost = n.task_cost;
        sol.comm_cost = n.comm_cost;
        sol.ie_penalty = n.penalty;
        sol.objective = alpha * to_double(n.task_cost) + beta * to_double(n.comm_cost) + gamma * n.penalty;
        sol.expanded = expanded;
        return sol;
      }
      if (!closed.insert({n.s, n.used}).second) continue;
      if (++expanded > bo.node_budget) throw ResourceLimit("balanced search budget exhausted");
      for (size_t ai = 0; ai < am.actions.size(); ++ai) {
        const auto& a = am.actions[ai];
        if (!am.applicable(n.s, a)) continue;
        auto c = std::make_shared<Node>(n);
        c->s = am.apply(n.s, a);
        c->plan.push_back(a.name);
        double step = 0;
        switch (a.kind) {
          case AugmentedAction::Kind::task:
            c->task_cost += a.cost;
            step = alpha * to_double(a.cost);
            break;
          case AugmentedAction::Kind::explanatory:
            if (n.used[*a.meta] || *a.meta < n.last_meta) continue;
            c->used[*a.meta] = true;
            c->last_meta = *a.meta + 1;
            c->comm_cost += a.cost;
            step = beta * message_scale * to_double(a.cost);
            break;
          case AugmentedAction::Kind::start: break;
          case AugmentedAction::Kind::finish: {
            Cost cs = cstar_for(n.used);
            if (cs.is_inf()) continue;
            std::vector<Edit> edits;
            for (size_t i = 0; i < n.used.size(); ++i)
              if (n.used[i]) edits.push_back(am.meta[i].edit());
            auto t = extract_fragments(am, n.plan).first;
            Cost ct = plan_cost(apply_explanation(mental, edits), t);
            if (ct.is_inf()) continue;
            Rational gap = ct.value() - cs.value();
            if (mode != BalanceMode::optimal_balanced && gap != 0) continue;
            c->penalty = mode == BalanceMode::optimal_balanced ? w.penalty(gap) : 0;
            step = mode == BalanceMode::optimal_balanced ? gamma * c->penalty : 0;
            break;
          }
        }
        c->g = n.g + step;
        open.push({c->g, order++, c});
      }
    }
    return std::nullopt;
  }
};

}  // namespace detail

// Balanced plan in one of three modes. Perfectly-explicable-optimal scales message costs so their total stays
// strictly below the robot model's optimality delta.
inline BalancedSolution balanced_plan(const PlanningModel& robot, const PlanningModel& mental, BalanceWeights w,
                                      BalanceMode mode, const BalanceOptions& bo = {}) {
  w.check();
  if (optimal_cost(robot, bo.search).is_inf()) throw Unsolvable("robot model is unsolvable");
  AugmentedModel am = compile_augmented(robot, mental, bo.message_costs, bo.observe_execution, bo.default_message_cost);
  detail::BalancedSearch s{robot, mental, am, w, mode, 1, bo, {}};
  if (mode == BalanceMode::perfectly_explicable_optimal) {
    s.w.alpha = 1;
    s.w.beta = 1;
    s.w.gamma = 0;
    OptimalityDelta delta = optimality_delta(robot);
    double total = 0;
    for (const auto& a : am.actions)
      if (a.kind == AugmentedAction::Kind::explanatory) total += to_double(a.cost);
    if (delta.value.finite() && total > 0) s.message_scale = to_double(delta.value.value()) / (2 * total);
  }
  auto sol = s.run();
  if (!sol) throw Unsolvable("no balanced plan exists");
  if (mode == BalanceMode::perfectly_explicable_optimal) sol->objective = to_double(sol->comm_cost);
  return *sol;
}

// Legibility trade-off: either announce the goal (one message) and follow an optimal plan, or find the plan
// whose k-step prefix best isolates the true goal among the hypotheses. Objective
// alpha*C(pi) + beta*C(E) + gamma*(1 - P(goal | prefix)).
struct LegibleBalance {
  Plan plan;
  bool announce = false;
  Rational probability{0};
  double objective = 0;
};

inline Rational goal_posterior(const PlanningModel& robot, const std::vector<std::set<Fluent>>& goals, size_t true_goal,
                               const Plan& prefix, const SearchOptions& opt = {}) {
  size_t consistent = 0;
  bool true_ok = false;
  for (size_t g = 0; g < goals.size(); ++g) {
    PlanningModel m = robot;
    m.goal = goals[g];
    Cost cs = optimal_cost(m, opt);
    if (cs.is_inf()) continue;
    auto done = enumerate_completions(m, prefix, cs.value(), 1);
    if (done.plans.empty()) continue;
    ++consistent;
    if (g == true_goal) true_ok = true;
  }
  if (!true_ok || consistent == 0) return Rational(0);
  return Rational(1, static_cast<long long>(consistent));
}

inline LegibleBalance balanced_legibility(const PlanningModel& robot, const std::vector<std::set<Fluent>>& goals,
                                          size_t true_goal, size_t k, const BalanceWeights& w,
                                          const Rational& message_cost, const Rational& slack, size_t cap = 200) {
  w.check();
  if (true_goal >= goals.size()) throw std::invalid_argument("true goal index out of range");
  PlanningModel m = robot;
  m.goal = goals[true_goal];
  Cost cs = optimal_cost(m);
  if (cs.is_inf()) throw Unsolvable("true goal is unreachable");
  const double a = to_double(w.alpha), b = to_double(w.beta), c = to_double(w.gamma);
  LegibleBalance best;
  best.announce = goals.size() > 1;
  best.plan = optimal_plan(m).plan;
  best.probability = 1;
  best.objective = a * to_double(cs.value()) + (best.announce ? b * to_double(message_cost) : 0);
  for (const auto& p : enumerate_valid_bounded(m, cs.value() + slack, cap).plans) {
    Plan prefix(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(std::min(k, p.size())));
    Rational pr = goal_posterior(robot, goals, true_goal, prefix);
    double obj = a * to_double(plan_cost(m, p).value()) + c * (1 - to_double(pr));
    if (obj < best.objective - 1e-9) best = {p, false, pr, obj};
  }
  return best;
}

// Predictability trade-off: commit to the first c actions of the robot-optimal plan so that completions of the
// k-step prefix must follow the commitment. Objective alpha*C(pi) + beta*c*message_cost
// + gamma*(1 - 1/#completions).
struct PredictableBalance {
  Plan plan;
  size_t committed = 0;
  size_t completions = 0;
  double objective = 0;
};

inline PredictableBalance balanced_predictability(const PlanningModel& robot, size_t k, const BalanceWeights& w,
                                                  const Rational& message_cost, size_t cap = 1000) {
  w.check();
  auto opt = optimal_plan(robot);
  const double a = to_double(w.alpha), b = to_double(w.beta), c = to_double(w.gamma);
  PredictableBalance best;
  for (size_t commit = 0; commit <= opt.plan.size(); ++commit) {
    Plan fixed(opt.plan.begin(), opt.plan.begin() + static_cast<std::ptrdiff_t>(std::max(commit, std::min(k, opt.plan.size()))));
    auto comp = enumerate_completions(robot, fixed, opt.cost, cap);
    size_t n = std::max<size_t>(comp.plans.size(), 1);
    double obj = a * to_double(opt.cost) + b * static_cast<double>(commit) * to_double(message_cost) +
                 c * (1 - 1.0 / static_cast<double>(n));
    if (commit == 0 || obj < best.objective - 1e-9) best = {opt.plan, commit, n, obj};
  }
  return best;
}

}  // namespace hap
