#pragma once

#include "hap/model.hpp"

#include <deque>
#include <functional>
#include <random>

namespace hap {

struct InsufficientSamples : std::runtime_error {
  InsufficientSamples() : std::runtime_error("no sampled state to learn from") {}
};
struct FoilExecutable : std::runtime_error {
  FoilExecutable() : std::runtime_error("foil executes in the simulator") {}
};
struct NoMatchingState : std::runtime_error {
  NoMatchingState() : std::runtime_error("no sampled state contains the concept set") {}
};
struct FoilBetter : std::runtime_error {
  FoilBetter() : std::runtime_error("foil is valid and cheaper than the plan") {}
};
struct DegenerateBaseRate : std::invalid_argument {
  DegenerateBaseRate() : std::invalid_argument("observation probability is zero") {}
};

using StateId = std::string;

// Deterministic opaque simulator.
struct BlackboxSim {
  StateId initial;
  std::vector<std::string> actions;
  std::function<std::optional<StateId>(const StateId&, const std::string&)> step;  // nullopt = invalid
  std::function<Rational(const StateId&, const std::string&)> cost;
  std::function<bool(const StateId&)> goal_test;
  std::function<std::string(const StateId&)> render;  // optional
};

struct Concept {
  std::string name;
  std::function<bool(const StateId&)> evaluate;
  std::optional<Rational> accuracy;  // absent means exact
};

struct SamplerConfig {
  size_t budget = 100;
  size_t locality_radius = 2;
  uint64_t seed = 0;

  void check() const {
    if (budget < 1) throw std::invalid_argument("sampling budget must be at least 1");
  }
};

inline std::set<std::string> concept_state(const std::vector<Concept>& concepts, const StateId& s) {
  std::set<std::string> out;
  for (const auto& c : concepts)
    if (c.evaluate(s)) out.insert(c.name);
  return out;
}

// States visited by executing the plan until it ends or fails.
inline std::vector<StateId> trace_states(const BlackboxSim& sim, const Plan& plan) {
  std::vector<StateId> out{sim.initial};
  StateId s = sim.initial;
  for (const auto& a : plan) {
    auto n = sim.step(s, a);
    if (!n) break;
    s = *n;
    out.push_back(s);
  }
  return out;
}

// States within locality_radius steps of the traces, shuffled with the seed and cut to the budget. A larger
// budget on the same seed yields a superset.
inline std::vector<StateId> sample_states(const BlackboxSim& sim, const std::vector<Plan>& traces,
                                          const SamplerConfig& cfg) {
  cfg.check();
  std::map<StateId, size_t> dist;
  std::deque<StateId> q;
  auto seed_state = [&](const StateId& s) {
    if (dist.emplace(s, 0).second) q.push_back(s);
  };
  seed_state(sim.initial);
  for (const auto& p : traces)
    for (const auto& s : trace_states(sim, p)) seed_state(s);
  while (!q.empty()) {
    StateId s = q.front();
    q.pop_front();
    size_t d = dist[s];
    if (d >= cfg.locality_radius) continue;
    for (const auto& a : sim.actions) {
      auto n = sim.step(s, a);
      if (n && dist.emplace(*n, d + 1).second) q.push_back(*n);
    }
  }
  std::vector<StateId> all;
  for (const auto& [s, _] : dist) all.push_back(s);
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(all.begin(), all.end(), rng);
  if (all.size() > cfg.budget) all.resize(cfg.budget);
  return all;
}

struct LearnedModel {
  PlanningModel model;
  size_t samples = 0;
  bool degenerate = false;  // a single sample was used
};

// Local STRIPS approximation over concept fluents from sampled transitions.
inline LearnedModel learn_local_model(const BlackboxSim& sim, const std::vector<Concept>& concepts,
                                      const SamplerConfig& cfg, const std::vector<Plan>& traces = {}) {
  auto samples = sample_states(sim, traces, cfg);
  if (samples.empty()) throw InsufficientSamples();
  LearnedModel lm;
  lm.samples = samples.size();
  lm.degenerate = samples.size() == 1;
  PlanningModel& m = lm.model;
  for (const auto& c : concepts) m.fluents.insert(c.name);
  std::optional<std::set<std::string>> goal;
  for (const auto& a : sim.actions) {
    std::optional<std::set<std::string>> pre;
    ActionDef def;
    def.name = a;
    std::optional<Rational> cost;
    for (const auto& s : samples) {
      auto n = sim.step(s, a);
      if (!n) continue;
      auto cs = concept_state(concepts, s);
      auto cn = concept_state(concepts, *n);
      if (!pre) {
        pre = cs;
      } else {
        std::set<std::string> keep;
        std::set_intersection(pre->begin(), pre->end(), cs.begin(), cs.end(), std::inserter(keep, keep.end()));
        pre = keep;
      }
      for (const auto& f : cn)
        if (!cs.count(f)) def.add.insert(f);
      for (const auto& f : cs)
        if (!cn.count(f)) def.del.insert(f);
      Rational c = sim.cost(s, a);
      if (!cost || c < *cost) cost = c;
    }
    if (!pre) continue;
    def.pre = *pre;
    def.cost = *cost;
    m.actions[a] = def;
  }
  for (const auto& s : samples) {
    if (!sim.goal_test(s)) continue;
    auto cs = concept_state(concepts, s);
    if (!goal) {
      goal = cs;
    } else {
      std::set<std::string> keep;
      std::set_intersection(goal->begin(), goal->end(), cs.begin(), cs.end(), std::inserter(keep, keep.end()));
      goal = keep;
    }
  }
  m.init = concept_state(concepts, sim.initial);
  if (goal) m.goal = *goal;
  return lm;
}

struct PreconditionResult {
  size_t failing_step = 0;
  std::string action;
  std::set<std::string> candidates;
  bool vocab_gap = false;
  size_t samples_used = 0;
};

// Concepts false where the foil fails and true in every sampled state where the failing action executes.
inline PreconditionResult identify_failing_precondition(const BlackboxSim& sim, const std::vector<Concept>& concepts,
                                                        const Plan& foil, const SamplerConfig& cfg,
                                                        bool exhaustive_concepts = false) {
  StateId s = sim.initial;
  std::optional<size_t> fail;
  for (size_t i = 0; i < foil.size(); ++i) {
    auto n = sim.step(s, foil[i]);
    if (!n) {
      fail = i;
      break;
    }
    s = *n;
  }
  if (!fail) throw FoilExecutable();
  PreconditionResult r;
  r.failing_step = *fail;
  r.action = foil[*fail];
  auto at_fail = concept_state(concepts, s);
  for (const auto& c : concepts)
    if (!at_fail.count(c.name)) r.candidates.insert(c.name);
  for (const auto& x : sample_states(sim, {foil}, cfg)) {
    if (exhaustive_concepts && r.candidates.size() <= 1) break;
    if (!sim.step(x, r.action)) continue;
    ++r.samples_used;
    auto cx = concept_state(concepts, x);
    for (auto it = r.candidates.begin(); it != r.candidates.end();) {
      if (!cx.count(*it))
        it = r.candidates.erase(it);
      else
        ++it;
    }
  }
  r.vocab_gap = r.candidates.empty();
  return r;
}

struct AbstractCost {
  Cost value;  // +inf when no matching sampled state executes the action
  size_t samples_used = 0;
};

// Sampled minimum cost of the action over states containing the concept set.
inline AbstractCost estimate_abstract_cost(const BlackboxSim& sim, const std::vector<Concept>& concepts,
                                           const std::set<std::string>& concept_set, const std::string& action,
                                           const SamplerConfig& cfg, const std::vector<Plan>& traces = {}) {
  for (const auto& c : concept_set) {
    bool known = false;
    for (const auto& k : concepts) known = known || k.name == c;
    if (!known) throw std::invalid_argument("unknown concept '" + c + "'");
  }
  AbstractCost r{Cost::infinity(), 0};
  bool matched = false;
  for (const auto& s : sample_states(sim, traces, cfg)) {
    auto cs = concept_state(concepts, s);
    if (!std::includes(cs.begin(), cs.end(), concept_set.begin(), concept_set.end())) continue;
    matched = true;
    ++r.samples_used;
    if (!sim.step(s, action)) continue;
    Cost c(sim.cost(s, action));
    if (c < r.value) r.value = c;
  }
  if (!matched) throw NoMatchingState();
  return r;
}

enum class FoilVerdict { invalid_at_step, goal_miss, costlier, equal_cost };

inline std::string to_string(FoilVerdict v) {
  switch (v) {
    case FoilVerdict::invalid_at_step: return "invalid-at-step";
    case FoilVerdict::goal_miss: return "goal-miss";
    case FoilVerdict::costlier: return "costlier";
    case FoilVerdict::equal_cost: return "equal-cost";
  }
  return "?";
}

struct FoilExplanation {
  FoilVerdict verdict = FoilVerdict::invalid_at_step;
  std::optional<PreconditionResult> failure;
  std::vector<std::set<std::string>> certificate;  // per foil step concept sets
  Cost certificate_cost{0};
  Rational plan_cost{0};
  Rational foil_cost{0};
};

inline Rational sim_cost(const BlackboxSim& sim, const Plan& plan) {
  Rational total(0);
  StateId s = sim.initial;
  for (const auto& a : plan) {
    auto n = sim.step(s, a);
    if (!n) throw InvalidPlan("plan fails in the simulator at '" + a + "'");
    total += sim.cost(s, a);
    s = *n;
  }
  return total;
}

// Why the plan is preferred over the foil: a failing precondition when the foil breaks, or a set of concept
// conditions whose abstract step costs already exceed the plan cost. Concepts are added greedily by the
// largest increase of the certified total.
inline FoilExplanation explain_foil(const BlackboxSim& sim, const std::vector<Concept>& concepts, const Plan& plan,
                                    const Plan& foil, const SamplerConfig& cfg) {
  auto tr = trace_states(sim, plan);
  if (tr.size() != plan.size() + 1 || !sim.goal_test(tr.back())) throw InvalidPlan("plan does not reach the goal");
  FoilExplanation fe;
  fe.plan_cost = sim_cost(sim, plan);
  auto ft = trace_states(sim, foil);
  if (ft.size() != foil.size() + 1) {
    fe.verdict = FoilVerdict::invalid_at_step;
    fe.failure = identify_failing_precondition(sim, concepts, foil, cfg);
    return fe;
  }
  fe.foil_cost = sim_cost(sim, foil);
  if (!sim.goal_test(ft.back())) {
    fe.verdict = FoilVerdict::goal_miss;
    return fe;
  }
  if (fe.foil_cost < fe.plan_cost) throw FoilBetter();
  if (fe.foil_cost == fe.plan_cost) {
    fe.verdict = FoilVerdict::equal_cost;
    return fe;
  }
  fe.verdict = FoilVerdict::costlier;
  std::vector<Plan> traces{plan, foil};
  fe.certificate.assign(foil.size(), {});
  std::vector<Cost> step_cost(foil.size());
  auto abs_cost = [&](const std::set<std::string>& cs, size_t i) {
    try {
      return estimate_abstract_cost(sim, concepts, cs, foil[i], cfg, traces).value;
    } catch (const NoMatchingState&) {
      return Cost(sim.cost(ft[i], foil[i]));
    }
  };
  auto total = [&]() {
    Cost t(0);
    for (const auto& c : step_cost) t += c;
    return t;
  };
  for (size_t i = 0; i < foil.size(); ++i) step_cost[i] = abs_cost({}, i);
  while (!(Cost(fe.plan_cost) < total())) {
    std::optional<std::tuple<Cost, size_t, std::string>> best;
    for (size_t i = 0; i < foil.size(); ++i) {
      for (const auto& c : concept_state(concepts, ft[i])) {
        if (fe.certificate[i].count(c)) continue;
        auto cs = fe.certificate[i];
        cs.insert(c);
        Cost v = abs_cost(cs, i);
        if (!(step_cost[i] < v)) continue;
        Cost gain = v.is_inf() ? Cost::infinity() : Cost(v.value() - step_cost[i].value());
        if (!best || std::get<0>(*best) < gain) best = std::make_tuple(gain, i, c);
      }
    }
    if (!best) break;
    auto [_, i, c] = *best;
    fe.certificate[i].insert(c);
    step_cost[i] = abs_cost(fe.certificate[i], i);
  }
  fe.certificate_cost = total();
  return fe;
}

struct ConfidenceReport {
  std::string hypothesis;
  double posterior = 0;
  size_t samples_used = 0;
};

// One exact-mode update of P(c not in pre(a)) from a sample where a executes and c holds.
inline double exact_update(double p_not_pre, double p_oc_given_rest, double p_oc_given_a) {
  if (p_oc_given_a <= 0) throw DegenerateBaseRate();
  return std::clamp(p_oc_given_rest * p_not_pre / p_oc_given_a, 0.0, 1.0);
}

// Posterior that c is a precondition of a after `positives` samples where a executed and c was observed true.
// The observation probability P(O_c | O_a) is obtained by total probability.
inline ConfidenceReport precondition_confidence_exact(const std::string& concept_name, const std::string& action,
                                                      double prior_in_pre, double base_rate, size_t positives) {
  double not_pre = 1 - prior_in_pre;
  for (size_t i = 0; i < positives; ++i) {
    double p_oa = base_rate * not_pre + (1 - not_pre);
    not_pre = exact_update(not_pre, base_rate, p_oa);
  }
  return {concept_name + " in pre(" + action + ")", 1 - not_pre, positives};
}

// Noisy classifier with accuracy q; observations are the classifier outputs in states where a executed.
inline ConfidenceReport precondition_confidence_noisy(const std::string& concept_name, const std::string& action,
                                                      double prior_in_pre, double base_rate, double accuracy,
                                                      const std::vector<bool>& observations) {
  if (accuracy <= 0.5 || accuracy > 1) throw std::invalid_argument("classifier accuracy must be in (0.5, 1]");
  double log_in = std::log(std::max(prior_in_pre, 0.0)), log_out = std::log(std::max(1 - prior_in_pre, 0.0));
  const double p1_in = accuracy;
  const double p1_out = base_rate * accuracy + (1 - base_rate) * (1 - accuracy);
  for (bool o : observations) {
    log_in += std::log(o ? p1_in : 1 - p1_in);
    log_out += std::log(o ? p1_out : 1 - p1_out);
  }
  double post;
  if (std::isinf(log_in) && log_in < 0)
    post = 0;
  else if (std::isinf(log_out) && log_out < 0)
    post = 1;
  else
    post = 1 / (1 + std::exp(log_out - log_in));
  return {concept_name + " in pre(" + action + ")", std::clamp(post, 0.0, 1.0), observations.size()};
}

// Posterior that executing a in states with the concept set costs at least k. Each sample is the observed cost
// (nullopt when a is inexecutable there); under the infinite-cost convention inexecutable samples count as
// consistent, otherwise they are skipped.
inline ConfidenceReport cost_confidence(const std::string& hypothesis, double prior, double p_cost_ge_k,
                                        const Rational& k, const std::vector<std::optional<Rational>>& samples,
                                        bool infinite_cost_convention = true) {
  double p = prior;
  size_t used = 0;
  for (const auto& s : samples) {
    if (!s && !infinite_cost_convention) continue;
    ++used;
    if (s && *s < k) {
      p = 0;
      continue;
    }
    double denom = p + (1 - p) * p_cost_ge_k;
    if (denom <= 0) throw DegenerateBaseRate();
    p = p / denom;
  }
  return {hypothesis, std::clamp(p, 0.0, 1.0), used};
}

inline bool should_drop(double p_not_precondition, double threshold = 0.95) { return p_not_precondition > threshold; }

// Fraction of sampled states where the concept holds.
inline double base_rate(const Concept& c, const std::vector<StateId>& samples) {
  if (samples.empty()) throw InsufficientSamples();
  size_t k = 0;
  for (const auto& s : samples) k += c.evaluate(s) ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(samples.size());
}

inline std::string state_id_of(const TaskState& s) {
  std::string out;
  for (const auto& f : s) out += f + ";";
  return out;
}

inline TaskState state_of_id(const StateId& id) {
  TaskState s;
  size_t start = 0;
  while (start < id.size()) {
    size_t end = id.find(';', start);
    s.insert(id.substr(start, end - start));
    start = end + 1;
  }
  return s;
}

// A STRIPS model behind the simulator interface.
inline BlackboxSim wrap_model(const PlanningModel& m) {
  BlackboxSim sim;
  sim.initial = state_id_of(m.init);
  for (const auto& [n, _] : m.actions) sim.actions.push_back(n);
  sim.step = [m](const StateId& s, const std::string& a) -> std::optional<StateId> {
    auto n = progress(m, state_of_id(s), a);
    if (!n) return std::nullopt;
    return state_id_of(*n);
  };
  sim.cost = [m](const StateId&, const std::string& a) { return m.action(a).cost; };
  sim.goal_test = [m](const StateId& s) { return satisfies(state_of_id(s), m.goal); };
  sim.render = [](const StateId& s) { return s; };
  return sim;
}

// One exact concept per fluent, optionally skipping some.
inline std::vector<Concept> fluent_concepts(const PlanningModel& m, const std::set<Fluent>& withheld = {}) {
  std::vector<Concept> out;
  for (const auto& f : m.fluents) {
    if (withheld.count(f)) continue;
    out.push_back({f, [f](const StateId& s) { return state_of_id(s).count(f) > 0; }, std::nullopt});
  }
  return out;
}

}  // namespace hap
