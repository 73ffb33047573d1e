#pragma once

#include "hap/combinations.hpp"
#include "hap/labeling.hpp"
#include "hap/reconcile.hpp"

#include <functional>
#include <random>

namespace hap {

struct ForeignInstantiation : std::invalid_argument {
  ForeignInstantiation() : std::invalid_argument("instantiation does not belong to the annotated model") {}
};
struct CompletionCapExceeded : std::runtime_error {
  CompletionCapExceeded() : std::runtime_error("completion set exceeds the enumeration cap") {}
};
struct NoSatisfyingSet : std::runtime_error {
  NoSatisfyingSet() : std::runtime_error("no message subset makes every step explicable") {}
};
struct FoilValid : std::invalid_argument {
  explicit FoilValid(size_t i) : std::invalid_argument("foil " + std::to_string(i) + " is valid in the robot model") {}
};

enum class Slot { pre, add, del, init, goal };

inline std::string to_string(Slot s) {
  switch (s) {
    case Slot::pre: return "pre";
    case Slot::add: return "add";
    case Slot::del: return "del";
    case Slot::init: return "init";
    case Slot::goal: return "goal";
  }
  return "?";
}

inline Slot slot_from_string(const std::string& s) {
  for (auto x : {Slot::pre, Slot::add, Slot::del, Slot::init, Slot::goal})
    if (to_string(x) == s) return x;
  throw std::invalid_argument("unknown annotation slot '" + s + "'");
}

// A possible (uncertain) model feature with its probability of being part of the mental model.
struct Annotation {
  Slot slot = Slot::pre;
  std::string action;
  Fluent fluent;
  Rational prob{1, 2};

  Feature feature() const {
    switch (slot) {
      case Slot::pre: return Feature::pre(action, fluent);
      case Slot::add: return Feature::add(action, fluent);
      case Slot::del: return Feature::del(action, fluent);
      case Slot::init: return Feature::init(fluent);
      case Slot::goal: return Feature::goal(fluent);
    }
    return {};
  }
  std::string key() const { return feature().key(); }
};

struct AnnotatedModel {
  PlanningModel known;
  std::vector<Annotation> possible;

  void check() const {
    auto g = gamma_map(known);
    std::set<std::string> seen;
    for (const auto& a : possible) {
      if (a.prob <= 0 || a.prob >= 1) throw ModelError("annotation '" + a.key() + "' probability not in (0,1)");
      if (g.count(a.feature())) throw ModelError("annotation '" + a.key() + "' is already known");
      if (!seen.insert(a.key()).second) throw ModelError("duplicate annotation '" + a.key() + "'");
      if ((a.slot == Slot::pre || a.slot == Slot::add || a.slot == Slot::del) && !known.actions.count(a.action))
        throw ModelError("annotation on unknown action '" + a.action + "'");
    }
  }

  std::set<Fluent> fluents() const {
    std::set<Fluent> out = known.fluents;
    for (const auto& a : possible) out.insert(a.fluent);
    return out;
  }

  int find(const Feature& f) const {
    for (size_t i = 0; i < possible.size(); ++i)
      if (possible[i].feature() == f) return static_cast<int>(i);
    return -1;
  }
};

using Realization = std::vector<bool>;

inline PlanningModel instantiate(const AnnotatedModel& am, const Realization& r) {
  if (r.size() != am.possible.size()) throw ForeignInstantiation();
  auto fs = gamma_map(am.known);
  for (size_t i = 0; i < r.size(); ++i)
    if (r[i]) fs.insert(am.possible[i].feature());
  return gamma_inverse(fs, am.fluents());
}

inline Rational likelihood(const AnnotatedModel& am, const Realization& r) {
  if (r.size() != am.possible.size()) throw ForeignInstantiation();
  Rational p(1);
  for (size_t i = 0; i < r.size(); ++i) p *= r[i] ? am.possible[i].prob : Rational(1) - am.possible[i].prob;
  return p;
}

struct Completion {
  Realization realized;
  Rational likelihood;
};

inline std::vector<Completion> completions(const AnnotatedModel& am, size_t cap = 4096) {
  size_t k = am.possible.size();
  if (k >= 63 || (size_t{1} << k) > cap) throw CompletionCapExceeded();
  std::vector<Completion> out;
  for (size_t m = 0; m < (size_t{1} << k); ++m) {
    Realization r(k);
    for (size_t i = 0; i < k; ++i) r[i] = (m >> i) & 1u;
    out.push_back({r, likelihood(am, r)});
  }
  return out;
}

struct BoundModels {
  PlanningModel m_min;
  PlanningModel m_max;
};

inline BoundModels bounds_models(const AnnotatedModel& am) {
  auto base = gamma_map(am.known);
  auto mn = base, mx = base;
  for (const auto& a : am.possible) {
    switch (a.slot) {
      case Slot::pre:
      case Slot::del:
      case Slot::goal: mn.insert(a.feature()); break;
      case Slot::add:
      case Slot::init: mx.insert(a.feature()); break;
    }
  }
  auto fl = am.fluents();
  return {gamma_inverse(mn, fl), gamma_inverse(mx, fl)};
}

// Applies edits: an edit touching an annotated feature resolves that annotation, then the feature is added
// to or removed from the known model.
inline AnnotatedModel apply_annotated_edits(const AnnotatedModel& am, const std::vector<Edit>& edits) {
  AnnotatedModel out;
  auto fl = am.fluents();
  std::set<std::string> touched;
  for (const auto& e : edits) touched.insert(e.feature.key());
  for (const auto& a : am.possible)
    if (!touched.count(a.key())) out.possible.push_back(a);
  auto fs = gamma_map(am.known);
  apply_edits(fs, edits);
  out.known = gamma_inverse(fs, fl);
  for (const auto& a : out.possible) out.known.fluents.insert(a.fluent);
  return out;
}

// Truthful edits toward the robot model: known-feature differences (cost 1) and one resolving edit per
// annotation (cost 2).
inline std::vector<std::pair<Edit, Rational>> conformant_universe(const PlanningModel& robot, const AnnotatedModel& am,
                                                                  Rational known_cost = 1, Rational annot_cost = 2) {
  std::set<std::string> annotated;
  for (const auto& a : am.possible) annotated.insert(a.key());
  auto gr = gamma_map(robot);
  std::vector<std::pair<Edit, Rational>> out;
  for (const auto& e : model_difference(am.known, robot))
    if (!annotated.count(e.feature.key())) out.push_back({e, known_cost});
  for (const auto& a : am.possible) {
    Edit e{gr.count(a.feature()) > 0, a.feature(), true};
    out.push_back({e, annot_cost});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

// Optimal in the updated M_max and executable in the updated M_min.
inline bool conformant_test(const Plan& plan, const AnnotatedModel& am, const SearchOptions& opt = {}) {
  auto b = bounds_models(am);
  if (plan_cost(b.m_min, plan).is_inf()) return false;
  Cost c = plan_cost(b.m_max, plan);
  return c.finite() && c == optimal_cost(b.m_max, opt);
}

struct UncertainOptions {
  SearchOptions search;
  Rational known_cost{1};
  Rational annot_cost{2};
  size_t max_expansions = 200000;
};

inline Explanation conformant_explain(const Plan& plan, const PlanningModel& robot, const AnnotatedModel& am,
                                      const UncertainOptions& uo = {}) {
  auto uni = conformant_universe(robot, am, uo.known_cost, uo.annot_cost);
  auto selected = [&](const Bits& m) {
    std::vector<Edit> es;
    for (auto i : m.indices()) es.push_back(uni[i].first);
    return es;
  };
  std::unordered_map<Bits, bool, BitsHash> memo;
  auto goal = [&](const Bits& m) {
    auto it = memo.find(m);
    if (it != memo.end()) return it->second;
    bool ok = conformant_test(plan, apply_annotated_edits(am, selected(m)), uo.search);
    memo.emplace(m, ok);
    return ok;
  };
  std::vector<size_t> all(uni.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  size_t expanded = 0;
  auto res = detail::mask_search(
      uni.size(), [&](size_t i) { return uni[i].first.key(); }, [&](size_t i) { return uni[i].second; }, goal,
      [&](const Bits&) { return all; }, uo.max_expansions, expanded);
  if (!res) throw NoExplanation();
  Explanation e;
  e.etype = ExplanationType::CONFORMANT;
  e.target_plan = plan;
  e.edits = selected(*res);
  e.expanded = expanded;
  return e;
}

struct RobustnessReport {
  Rational value{0};
  bool exact = true;
  size_t samples = 0;
  double ci_half_width = 0;  // 95% normal interval for the Monte-Carlo estimate
};

inline bool plan_optimal_in(const PlanningModel& m, const Plan& plan, const SearchOptions& opt = {}) {
  Cost c = plan_cost(m, plan);
  return c.finite() && c == optimal_cost(m, opt);
}

// Probability mass of completions (after the edits) in which the plan is optimal.
inline RobustnessReport robustness(const Plan& plan, const AnnotatedModel& am, const std::vector<Edit>& edits,
                                   size_t cap = 4096, size_t samples = 2000, uint64_t seed = 1,
                                   const SearchOptions& opt = {}) {
  AnnotatedModel am2 = apply_annotated_edits(am, edits);
  RobustnessReport r;
  try {
    for (const auto& c : completions(am2, cap))
      if (plan_optimal_in(instantiate(am2, c.realized), plan, opt)) r.value += c.likelihood;
    return r;
  } catch (const CompletionCapExceeded&) {
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  size_t hits = 0;
  for (size_t s = 0; s < samples; ++s) {
    Realization re(am2.possible.size());
    for (size_t i = 0; i < re.size(); ++i) re[i] = u(rng) < to_double(am2.possible[i].prob);
    if (plan_optimal_in(instantiate(am2, re), plan, opt)) ++hits;
  }
  r.exact = false;
  r.samples = samples;
  r.value = Rational(static_cast<long long>(hits), static_cast<long long>(samples));
  double p = to_double(r.value);
  r.ci_half_width = 1.96 * std::sqrt(p * (1 - p) / static_cast<double>(samples));
  return r;
}

struct ConditionalNode {
  enum class Kind { done, tell, ask };
  Kind kind = Kind::done;
  Edit edit;                // tell
  Annotation question;      // ask
  Rational value{0};        // discounted cost of this subtree
  std::vector<ConditionalNode> children;  // tell: next; ask: {yes, no}
};

struct ConditionalOptions {
  SearchOptions search;
  Rational gamma{9, 10};
  Rational ask_cost{0};
  Rational tell_cost{1};
  size_t node_budget = 200000;
};

// AND/OR search for a conditional explanation. OR choices are tells (truthful edits on known features) and
// questions about annotations; a question's value is ask_cost + min(v_yes, v_no) + gamma * max(v_yes, v_no).
// The graph is acyclic (tells and answers only accumulate), so values are solved exactly with memoization.
class ConditionalSolver {
 public:
  ConditionalSolver(const Plan& plan, const PlanningModel& robot, const AnnotatedModel& am, ConditionalOptions opt)
      : plan_(plan), robot_(robot), am_(am), opt_(std::move(opt)) {
    auto gr = gamma_map(robot);
    std::set<std::string> annotated;
    for (const auto& a : am.possible) annotated.insert(a.key());
    for (const auto& e : model_difference(am.known, robot))
      if (!annotated.count(e.feature.key())) {
        tells_.push_back(e);
        tell_annotation_.push_back(-1);
      }
    for (size_t i = 0; i < am.possible.size(); ++i) {
      tells_.push_back({gr.count(am.possible[i].feature()) > 0, am.possible[i].feature(), false});
      tell_annotation_.push_back(static_cast<int>(i));
    }
    std::vector<size_t> order(tells_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return tells_[x] < tells_[y]; });
    std::vector<Edit> t2;
    std::vector<int> a2;
    for (auto i : order) {
      t2.push_back(tells_[i]);
      a2.push_back(tell_annotation_[i]);
    }
    tells_ = std::move(t2);
    tell_annotation_ = std::move(a2);
    k_ = am.possible.size();
  }

  ConditionalNode solve() {
    Bits root(tells_.size() + 2 * k_);
    value(root);
    return build(root);
  }

  size_t nodes() const { return memo_.size(); }

 private:
  // bits [0, T) tells applied; [T + 2i] annotation i answered, [T + 2i + 1] answer was yes
  bool answered(const Bits& s, size_t i) const { return s.test(tells_.size() + 2 * i); }
  bool answer(const Bits& s, size_t i) const { return s.test(tells_.size() + 2 * i + 1); }

  AnnotatedModel state_model(const Bits& s) const {
    std::vector<Edit> es;
    for (size_t i = 0; i < k_; ++i)
      if (answered(s, i)) es.push_back({answer(s, i), am_.possible[i].feature(), false});
    AnnotatedModel cur = apply_annotated_edits(am_, es);
    std::vector<Edit> told;
    for (size_t j = 0; j < tells_.size(); ++j)
      if (s.test(j)) told.push_back(tells_[j]);
    return apply_annotated_edits(cur, told);
  }

  bool tell_allowed(const Bits& s, size_t j) const {
    if (s.test(j)) return false;
    int a = tell_annotation_[j];
    if (a < 0) return true;
    return answered(s, static_cast<size_t>(a)) && answer(s, static_cast<size_t>(a)) != tells_[j].add;
  }

  Rational value(const Bits& s) {
    auto it = memo_.find(s);
    if (it != memo_.end()) return it->second.first;
    if (memo_.size() > opt_.node_budget) throw ResourceLimit("conditional explanation node budget exhausted");
    if (conformant_test(plan_, state_model(s), opt_.search)) {
      memo_[s] = {Rational(0), -1};
      return 0;
    }
    std::optional<Rational> best;
    long choice = -1;
    for (size_t j = 0; j < tells_.size(); ++j) {
      if (!tell_allowed(s, j)) continue;
      Bits s2 = s;
      s2.set(j);
      Rational v = opt_.tell_cost + value(s2);
      if (!best || v < *best) {
        best = v;
        choice = static_cast<long>(j);
      }
    }
    for (size_t i = 0; i < k_; ++i) {
      if (answered(s, i)) continue;
      Bits yes = s, no = s;
      yes.set(tells_.size() + 2 * i);
      yes.set(tells_.size() + 2 * i + 1);
      no.set(tells_.size() + 2 * i);
      Rational vy = value(yes), vn = value(no);
      Rational v = opt_.ask_cost + std::min(vy, vn) + opt_.gamma * std::max(vy, vn);
      if (!best || v < *best) {
        best = v;
        choice = static_cast<long>(tells_.size() + i);
      }
    }
    if (!best) throw NoExplanation();
    memo_[s] = {*best, choice};
    return *best;
  }

  ConditionalNode build(const Bits& s) {
    const auto& [v, choice] = memo_.at(s);
    ConditionalNode n;
    n.value = v;
    if (choice < 0) return n;
    auto c = static_cast<size_t>(choice);
    if (c < tells_.size()) {
      n.kind = ConditionalNode::Kind::tell;
      n.edit = tells_[c];
      Bits s2 = s;
      s2.set(c);
      n.children.push_back(build(s2));
      return n;
    }
    size_t i = c - tells_.size();
    n.kind = ConditionalNode::Kind::ask;
    n.question = am_.possible[i];
    Bits yes = s, no = s;
    yes.set(tells_.size() + 2 * i);
    yes.set(tells_.size() + 2 * i + 1);
    no.set(tells_.size() + 2 * i);
    n.children.push_back(build(yes));
    n.children.push_back(build(no));
    return n;
  }

  Plan plan_;
  PlanningModel robot_;
  AnnotatedModel am_;
  ConditionalOptions opt_;
  std::vector<Edit> tells_;
  std::vector<int> tell_annotation_;
  size_t k_ = 0;
  std::unordered_map<Bits, std::pair<Rational, long>, BitsHash> memo_;
};

inline ConditionalNode conditional_explain(const Plan& plan, const PlanningModel& robot, const AnnotatedModel& am,
                                           const ConditionalOptions& opt = {}) {
  return ConditionalSolver(plan, robot, am, opt).solve();
}

// Tells along the branch where every answer is "no" (the annotation is absent).
inline std::vector<Edit> adverse_leaf_tells(const ConditionalNode& root, const Plan& plan, const PlanningModel& robot) {
  auto gr = gamma_map(robot);
  std::vector<Edit> out;
  const ConditionalNode* n = &root;
  while (n->kind != ConditionalNode::Kind::done) {
    if (n->kind == ConditionalNode::Kind::tell) {
      out.push_back(n->edit);
      n = &n->children[0];
    } else {
      // adverse = the answer that disagrees with the robot model
      bool truth = gr.count(n->question.feature()) > 0;
      n = &n->children[truth ? 1 : 0];
    }
  }
  (void)plan;
  return out;
}

// Flattened rendering: "tell <edit>" / "ask <feature>" lines with indentation for branches.
inline void render_conditional(const ConditionalNode& n, std::string& out, int depth = 0) {
  std::string pad(static_cast<size_t>(depth) * 2, ' ');
  switch (n.kind) {
    case ConditionalNode::Kind::done: out += pad + "done\n"; break;
    case ConditionalNode::Kind::tell:
      out += pad + "tell " + render_edit_tagged(n.edit) + "\n";
      render_conditional(n.children[0], out, depth);
      break;
    case ConditionalNode::Kind::ask:
      out += pad + "ask " + render_feature_plain(n.question.feature()) + "?\n";
      out += pad + "yes:\n";
      render_conditional(n.children[0], out, depth + 1);
      out += pad + "no:\n";
      render_conditional(n.children[1], out, depth + 1);
      break;
  }
}

struct AnytimeResult {
  Explanation explanation;
  std::map<std::string, bool> answers;  // annotation key -> oracle answer
  size_t queries = 0;
  size_t restarts = 0;
};

using AnswerOracle = std::function<bool(const Annotation&)>;

// Depth-first (iterative deepening) explanation search under the assumption that each open annotation is
// present iff its probability is at least 1/2. At a candidate, the assumptions are checked with the oracle;
// contradicted answers become known and the search continues.
inline AnytimeResult anytime_explain(const Plan& plan, const PlanningModel& robot, const AnnotatedModel& am,
                                     const AnswerOracle& oracle, size_t max_depth = 4,
                                     const UncertainOptions& uo = {}) {
  AnytimeResult res;
  AnnotatedModel cur = am;
  size_t budget = uo.max_expansions;
  while (true) {
    auto uni = conformant_universe(robot, cur, uo.known_cost, uo.annot_cost);
    size_t n = uni.size();
    bool restarted = false;
    bool finished = false;
    for (size_t depth = 0; depth <= std::min(max_depth, n) && !restarted; ++depth) {
      for_each_combination(n, depth, [&](const std::vector<size_t>& idx) {
        if (budget-- == 0) throw ResourceLimit("anytime explanation budget exhausted");
        std::vector<Edit> es;
        for (auto i : idx) es.push_back(uni[i].first);
        AnnotatedModel edited = apply_annotated_edits(cur, es);
        Realization assumed(edited.possible.size());
        for (size_t i = 0; i < assumed.size(); ++i) assumed[i] = edited.possible[i].prob >= Rational(1, 2);
        if (!plan_optimal_in(instantiate(edited, assumed), plan, uo.search)) return false;
        std::vector<Edit> learned;
        for (size_t i = 0; i < assumed.size(); ++i) {
          bool a = oracle(edited.possible[i]);
          ++res.queries;
          res.answers[edited.possible[i].key()] = a;
          if (a != assumed[i]) learned.push_back({a, edited.possible[i].feature(), false});
        }
        if (learned.empty()) {
          res.explanation.etype = ExplanationType::ANYTIME;
          res.explanation.target_plan = plan;
          res.explanation.edits = es;
          finished = true;
          return true;
        }
        std::vector<Edit> resolve;
        for (const auto& a : cur.possible) {
          auto it = res.answers.find(a.key());
          if (it != res.answers.end()) resolve.push_back({it->second, a.feature(), false});
        }
        cur = apply_annotated_edits(cur, resolve);
        ++res.restarts;
        restarted = true;
        return true;
      });
      if (finished) return res;
    }
    if (!restarted) throw NoExplanation();
  }
}

struct Message {
  std::string id;
  Edit edit;
  Rational cost{1};
};

struct MessageSelection {
  std::vector<Message> chosen;
  Rational cost{0};
  bool exhaustive = true;
};

// Step i is explicable under message set m iff P(action) or some P(action@id), id in m, reaches the threshold.
inline bool steps_explicable(const Plan& plan, const std::vector<Message>& m, const LabelingModel& lab) {
  for (const auto& a : plan) {
    bool ok = lab.prob(a) >= lab.threshold;
    for (size_t j = 0; !ok && j < m.size(); ++j) ok = lab.prob(a + "@" + m[j].id) >= lab.threshold;
    if (!ok) return false;
  }
  return true;
}

inline MessageSelection message_select(const Plan& plan, const PlanningModel& robot, const std::vector<Message>& messages,
                                       const LabelingModel& lab) {
  if (plan_cost(robot, plan).is_inf()) throw InvalidPlan("plan is not valid in the robot model");
  const size_t n = messages.size();
  MessageSelection out;
  if (n <= 12) {
    std::optional<std::tuple<Rational, size_t, std::vector<std::string>, size_t>> best;
    for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
      std::vector<Message> m;
      Rational c(0);
      std::vector<std::string> ids;
      for (size_t j = 0; j < n; ++j)
        if ((mask >> j) & 1u) {
          m.push_back(messages[j]);
          c += messages[j].cost;
          ids.push_back(messages[j].id);
        }
      std::sort(ids.begin(), ids.end());
      auto key = std::make_tuple(c, m.size(), ids, mask);
      if (best && std::tie(std::get<0>(key), std::get<1>(key), std::get<2>(key)) >=
                      std::tie(std::get<0>(*best), std::get<1>(*best), std::get<2>(*best)))
        continue;
      if (steps_explicable(plan, m, lab)) best = key;
    }
    if (!best) throw NoSatisfyingSet();
    for (size_t j = 0; j < n; ++j)
      if ((std::get<3>(*best) >> j) & 1u) out.chosen.push_back(messages[j]);
    out.cost = std::get<0>(*best);
    return out;
  }
  out.exhaustive = false;
  std::vector<bool> used(n, false);
  auto covered = [&](const std::vector<Message>& m) {
    size_t c = 0;
    for (const auto& a : plan) c += steps_explicable({a}, m, lab) ? 1 : 0;
    return c;
  };
  while (!steps_explicable(plan, out.chosen, lab)) {
    size_t base = covered(out.chosen);
    std::optional<std::pair<Rational, size_t>> pick;
    for (size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      auto m = out.chosen;
      m.push_back(messages[j]);
      size_t gain = covered(m) - base;
      if (gain == 0) continue;
      Rational ratio = messages[j].cost / Rational(static_cast<long long>(gain));
      if (!pick || ratio < pick->first) pick = std::make_pair(ratio, j);
    }
    if (!pick) throw NoSatisfyingSet();
    used[pick->second] = true;
    out.chosen.push_back(messages[pick->second]);
    out.cost += messages[pick->second].cost;
  }
  return out;
}

struct FoilFailure {
  size_t foil = 0;
  int failing_step = -1;  // -1 means the goal is missed
  std::string action;
  std::set<Fluent> missing;
};

struct AbstractionRefutation {
  std::set<Fluent> lam_used;
  std::vector<FoilFailure> failures;
};

inline std::optional<FoilFailure> foil_failure(const PlanningModel& m, const Plan& foil, size_t index) {
  TaskState s = m.init;
  for (size_t i = 0; i < foil.size(); ++i) {
    auto it = m.actions.find(foil[i]);
    if (it == m.actions.end()) return FoilFailure{index, static_cast<int>(i), foil[i], {}};
    std::set<Fluent> miss;
    for (const auto& f : it->second.pre)
      if (!s.count(f)) miss.insert(f);
    if (!miss.empty()) return FoilFailure{index, static_cast<int>(i), foil[i], miss};
    s = apply_effects(s, it->second);
  }
  std::set<Fluent> miss;
  for (const auto& f : m.goal)
    if (!s.count(f)) miss.insert(f);
  if (!miss.empty()) return FoilFailure{index, -1, kGoalStep, miss};
  return std::nullopt;
}

// Smallest (then lexicographically least) subset of the projected fluents whose reintroduction makes every
// foil fail.
inline AbstractionRefutation refute_foils_by_abstraction(const PlanningModel& robot, const std::set<Fluent>& lam_universe,
                                                         const std::vector<Plan>& foils) {
  for (size_t i = 0; i < foils.size(); ++i)
    if (!foil_failure(robot, foils[i], i)) throw FoilValid(i);
  std::vector<Fluent> uni(lam_universe.begin(), lam_universe.end());
  AbstractionRefutation out;
  for (size_t depth = 0; depth <= uni.size(); ++depth) {
    bool found = for_each_combination(uni.size(), depth, [&](const std::vector<size_t>& idx) {
      std::set<Fluent> keep;
      for (auto i : idx) keep.insert(uni[i]);
      std::set<Fluent> proj;
      for (const auto& f : uni)
        if (!keep.count(f)) proj.insert(f);
      PlanningModel m = abstract_model(robot, proj);
      AbstractionRefutation r;
      r.lam_used = keep;
      for (size_t i = 0; i < foils.size(); ++i) {
        auto f = foil_failure(m, foils[i], i);
        if (!f) return false;
        r.failures.push_back(*f);
      }
      out = std::move(r);
      return true;
    });
    if (found) return out;
  }
  throw NoExplanation();
}

}  // namespace hap
