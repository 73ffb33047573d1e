#pragma once

#include "hap/annotated.hpp"
#include "hap/balanced.hpp"
#include "hap/gamma.hpp"
#include "hap/observer.hpp"

#include <json.hpp>

#include <cctype>
#include <sstream>

namespace hap {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct ParseError : std::runtime_error {
  size_t line, column;
  ParseError(const std::string& msg, size_t l, size_t c)
      : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), column(c) {}
};

struct SchemaError : std::runtime_error {
  std::string path;
  SchemaError(const std::string& msg, std::string p)
      : std::runtime_error((p.empty() ? std::string("/") : p) + ": " + msg), path(std::move(p)) {}
};

inline json rational_to_json(const Rational& r) {
  if (r.denominator() == 1) return r.numerator();
  return to_string(r);
}

inline Rational rational_from_json(const json& j, const std::string& path) {
  try {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number()) {
      std::ostringstream os;
      os << j.get<double>();
      return parse_rational(os.str());
    }
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const std::exception& e) {
    throw SchemaError(std::string("bad rational: ") + e.what(), path);
  }
  throw SchemaError("expected a number or a rational string", path);
}

namespace detail {

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError("expected an object", path);
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError("missing field '" + key + "'", path);
  return *it;
}

inline std::string string_at(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError("expected a string", path);
  auto s = j.get<std::string>();
  if (s.empty()) throw SchemaError("empty name", path);
  return s;
}

inline std::set<std::string> string_set(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError("expected an array", path);
  std::set<std::string> out;
  for (size_t i = 0; i < j.size(); ++i) out.insert(string_at(j[i], path + "/" + std::to_string(i)));
  return out;
}

inline std::set<std::string> optional_set(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) return {};
  return string_set(j[key], path + "/" + key);
}

inline void check_version(const json& j, const std::string& path) {
  if (!j.contains("schema_version")) return;
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
    throw SchemaError("unsupported schema_version", path + "/schema_version");
}

}  // namespace detail

inline json model_to_json(const PlanningModel& m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["fluents"] = std::vector<std::string>(m.fluents.begin(), m.fluents.end());
  j["actions"] = json::array();
  for (const auto& [n, a] : m.actions) {
    json ja;
    ja["name"] = n;
    ja["pre"] = std::vector<std::string>(a.pre.begin(), a.pre.end());
    ja["add"] = std::vector<std::string>(a.add.begin(), a.add.end());
    ja["del"] = std::vector<std::string>(a.del.begin(), a.del.end());
    ja["cost"] = rational_to_json(a.cost);
    j["actions"].push_back(ja);
  }
  j["init"] = std::vector<std::string>(m.init.begin(), m.init.end());
  j["goal"] = std::vector<std::string>(m.goal.begin(), m.goal.end());
  return j;
}

inline PlanningModel model_from_json(const json& j, const std::string& path = "") {
  detail::check_version(j, path);
  PlanningModel m;
  m.fluents = detail::optional_set(j, "fluents", path);
  const json& acts = detail::field(j, "actions", path);
  if (!acts.is_array()) throw SchemaError("expected an array", path + "/actions");
  for (size_t i = 0; i < acts.size(); ++i) {
    std::string p = path + "/actions/" + std::to_string(i);
    ActionDef a;
    a.name = detail::string_at(detail::field(acts[i], "name", p), p + "/name");
    a.pre = detail::optional_set(acts[i], "pre", p);
    a.add = detail::optional_set(acts[i], "add", p);
    a.del = detail::optional_set(acts[i], "del", p);
    a.cost = acts[i].contains("cost") ? rational_from_json(acts[i]["cost"], p + "/cost") : Rational(1);
    if (m.actions.count(a.name)) throw SchemaError("duplicate action '" + a.name + "'", p);
    m.add_action(std::move(a));
  }
  m.init = detail::string_set(detail::field(j, "init", path), path + "/init");
  m.goal = detail::string_set(detail::field(j, "goal", path), path + "/goal");
  m.fluents.insert(m.init.begin(), m.init.end());
  m.fluents.insert(m.goal.begin(), m.goal.end());
  try {
    m.check();
  } catch (const ModelError& e) {
    throw SchemaError(e.what(), path);
  }
  return m;
}

inline json annotated_to_json(const AnnotatedModel& am) {
  json j = model_to_json(am.known);
  json ann = json::object();
  for (const auto& a : am.possible) {
    json e;
    if (!a.action.empty()) e["action"] = a.action;
    e["fluent"] = a.fluent;
    e["prob"] = rational_to_json(a.prob);
    ann["possible_" + to_string(a.slot)].push_back(e);
  }
  j["annotations"] = ann;
  return j;
}

inline AnnotatedModel annotated_from_json(const json& j, const std::string& path = "") {
  AnnotatedModel am;
  am.known = model_from_json(j, path);
  if (j.contains("annotations")) {
    const json& ann = j["annotations"];
    std::string ap = path + "/annotations";
    if (!ann.is_object()) throw SchemaError("expected an object", ap);
    for (const auto& [key, list] : ann.items()) {
      if (key.rfind("possible_", 0) != 0) throw SchemaError("unknown annotation group '" + key + "'", ap);
      Slot slot;
      try {
        slot = slot_from_string(key.substr(9));
      } catch (const std::exception& e) {
        throw SchemaError(e.what(), ap + "/" + key);
      }
      if (!list.is_array()) throw SchemaError("expected an array", ap + "/" + key);
      for (size_t i = 0; i < list.size(); ++i) {
        std::string p = ap + "/" + key + "/" + std::to_string(i);
        Annotation a;
        a.slot = slot;
        if (slot == Slot::pre || slot == Slot::add || slot == Slot::del)
          a.action = detail::string_at(detail::field(list[i], "action", p), p + "/action");
        a.fluent = detail::string_at(detail::field(list[i], "fluent", p), p + "/fluent");
        a.prob = rational_from_json(detail::field(list[i], "prob", p), p + "/prob");
        am.possible.push_back(a);
      }
    }
  }
  try {
    am.check();
  } catch (const ModelError& e) {
    throw SchemaError(e.what(), path);
  }
  return am;
}

inline SensorModel sensor_from_json(const json& j, const std::string& path = "") {
  if (j.is_string() && j.get<std::string>() == "identity") return SensorModel::identity();
  if (!j.is_object()) throw SchemaError("expected an object or \"identity\"", path);
  if (j.value("identity", false)) return SensorModel::identity();
  std::map<std::string, ObservationToken> table;
  std::set<std::string> tokens = detail::optional_set(j, "tokens", path);
  if (j.contains("table")) {
    const json& t = j["table"];
    if (!t.is_array()) throw SchemaError("expected an array", path + "/table");
    for (size_t i = 0; i < t.size(); ++i) {
      std::string p = path + "/table/" + std::to_string(i);
      auto a = detail::string_at(detail::field(t[i], "action", p), p + "/action");
      auto tok = detail::string_at(detail::field(t[i], "token", p), p + "/token");
      if (!tokens.empty() && !tokens.count(tok)) throw SchemaError("token '" + tok + "' is not declared", p);
      table[a] = tok;
    }
  }
  return SensorModel::table(table, detail::optional_set(j, "projected", path));
}

inline json sensor_table_to_json(const std::map<std::string, ObservationToken>& table,
                                 const std::set<Fluent>& projected = {}) {
  json j;
  std::set<std::string> tokens;
  j["table"] = json::array();
  for (const auto& [a, t] : table) {
    j["table"].push_back({{"action", a}, {"token", t}});
    tokens.insert(t);
  }
  j["tokens"] = std::vector<std::string>(tokens.begin(), tokens.end());
  if (!projected.empty()) j["projected"] = std::vector<std::string>(projected.begin(), projected.end());
  return j;
}

inline json edit_to_json(const Edit& e) {
  return {{"op", e.add ? "add" : "remove"},
          {"feature", e.feature.key()},
          {"annotation", e.annotation},
          {"text", render_edit_tagged(e)}};
}

inline Edit edit_from_json(const json& j, const std::string& path = "") {
  Edit e;
  auto op = detail::string_at(detail::field(j, "op", path), path + "/op");
  if (op != "add" && op != "remove") throw SchemaError("op must be add or remove", path + "/op");
  e.add = op == "add";
  try {
    e.feature = parse_feature(detail::string_at(detail::field(j, "feature", path), path + "/feature"));
  } catch (const std::exception& ex) {
    throw SchemaError(ex.what(), path + "/feature");
  }
  e.annotation = j.value("annotation", false);
  return e;
}

inline json explanation_to_json(const Explanation& e) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["type"] = to_string(e.etype);
  j["edits"] = json::array();
  for (const auto& x : e.edits) j["edits"].push_back(edit_to_json(x));
  j["size"] = e.size();
  j["target_plan"] = e.target_plan;
  j["complete"] = e.complete;
  j["expanded"] = e.expanded;
  j["rendered"] = render_explanation(e);
  return j;
}

inline json cost_to_json(const Cost& c) {
  if (c.is_inf()) return "inf";
  return rational_to_json(c.value());
}

inline Plan plan_from_json(const json& j, const std::string& path = "") {
  if (!j.is_array()) throw SchemaError("expected an array of action names", path);
  Plan p;
  for (size_t i = 0; i < j.size(); ++i) p.push_back(detail::string_at(j[i], path + "/" + std::to_string(i)));
  return p;
}

inline std::vector<std::set<Fluent>> goals_from_json(const json& j, const std::string& path = "") {
  if (!j.is_array()) throw SchemaError("expected an array of goal conditions", path);
  std::vector<std::set<Fluent>> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(detail::string_set(j[i], path + "/" + std::to_string(i)));
  return out;
}

// Restricted grounded STRIPS text:
//   (define (model NAME)
//     (:fluents f ...)
//     (:init (f) ...)
//     (:goal (and (f) ...))
//     (:action NAME :precondition (and (f) ...) :effect (and (f) (not (g)) ...) :cost N))
// A multi-token atom such as (robot-at loc1) names the fluent robot-at_loc1.
namespace detail {

struct SExpr {
  bool atom = false;
  std::string text;
  std::vector<SExpr> items;
  size_t line = 1, column = 1;
};

class SExprReader {
 public:
  explicit SExprReader(const std::string& s) : src_(s) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < src_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

 private:
  const std::string& src_;
  size_t pos_ = 0, line_ = 1, col_ = 1;

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      } else if (src_[pos_] == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    SExpr e;
    e.line = line_;
    e.column = col_;
    if (src_[pos_] == ')') throw ParseError("unexpected ')'", line_, col_);
    if (src_[pos_] == '(') {
      advance();
      skip();
      while (pos_ < src_.size() && src_[pos_] != ')') {
        e.items.push_back(read());
        skip();
      }
      if (pos_ >= src_.size()) throw ParseError("unterminated list", e.line, e.column);
      advance();
      return e;
    }
    e.atom = true;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '(' &&
           src_[pos_] != ')' && src_[pos_] != ';') {
      e.text += src_[pos_];
      advance();
    }
    return e;
  }
};

inline bool is_atom(const SExpr& e, const std::string& t) { return e.atom && e.text == t; }

inline Fluent fluent_of(const SExpr& e) {
  if (e.atom) throw ParseError("expected a parenthesised fluent", e.line, e.column);
  if (e.items.empty()) throw ParseError("empty fluent name", e.line, e.column);
  std::string name;
  for (const auto& x : e.items) {
    if (!x.atom) throw ParseError("nested list inside a fluent", x.line, x.column);
    if (!name.empty()) name += "_";
    name += x.text;
  }
  return name;
}

// (and l1 l2 ...), a single literal, or (); literals may be negated when `allow_not`
inline void literals(const SExpr& e, std::set<Fluent>& pos, std::set<Fluent>* neg) {
  if (e.atom) throw ParseError("expected a condition list", e.line, e.column);
  if (e.items.empty()) return;
  if (is_atom(e.items[0], "and")) {
    for (size_t i = 1; i < e.items.size(); ++i) literals(e.items[i], pos, neg);
    return;
  }
  if (is_atom(e.items[0], "not")) {
    if (!neg) throw ParseError("negation is not allowed here", e.line, e.column);
    if (e.items.size() != 2) throw ParseError("'not' takes one fluent", e.line, e.column);
    neg->insert(fluent_of(e.items[1]));
    return;
  }
  pos.insert(fluent_of(e));
}

}  // namespace detail

struct StripsDocument {
  std::string name = "model";
  PlanningModel model;
};

inline StripsDocument parse_strips(const std::string& text) {
  auto forms = detail::SExprReader(text).read_all();
  if (forms.size() != 1) {
    size_t l = forms.size() > 1 ? forms[1].line : 1, c = forms.size() > 1 ? forms[1].column : 1;
    throw ParseError("expected exactly one (define ...) form", l, c);
  }
  const auto& d = forms[0];
  if (d.atom || d.items.empty() || !detail::is_atom(d.items[0], "define"))
    throw ParseError("expected (define ...)", d.line, d.column);
  StripsDocument doc;
  PlanningModel& m = doc.model;
  std::set<Fluent> declared;
  bool have_init = false, have_goal = false;
  for (size_t i = 1; i < d.items.size(); ++i) {
    const auto& f = d.items[i];
    if (f.atom || f.items.empty()) throw ParseError("expected a section", f.line, f.column);
    const auto& head = f.items[0];
    if (!head.atom) throw ParseError("expected a section keyword", head.line, head.column);
    if (head.text == "model" || head.text == "domain" || head.text == "problem") {
      if (f.items.size() != 2 || !f.items[1].atom) throw ParseError("expected a name", f.line, f.column);
      doc.name = f.items[1].text;
    } else if (head.text == ":fluents") {
      for (size_t k = 1; k < f.items.size(); ++k) {
        const auto& x = f.items[k];
        declared.insert(x.atom ? x.text : detail::fluent_of(x));
      }
    } else if (head.text == ":init") {
      have_init = true;
      for (size_t k = 1; k < f.items.size(); ++k) m.init.insert(detail::fluent_of(f.items[k]));
    } else if (head.text == ":goal") {
      have_goal = true;
      if (f.items.size() != 2) throw ParseError("':goal' takes one condition", f.line, f.column);
      detail::literals(f.items[1], m.goal, nullptr);
    } else if (head.text == ":action") {
      if (f.items.size() < 2 || !f.items[1].atom) throw ParseError("expected an action name", f.line, f.column);
      ActionDef a;
      a.name = f.items[1].text;
      for (size_t k = 2; k < f.items.size(); k += 2) {
        const auto& key = f.items[k];
        if (!key.atom || key.text.empty() || key.text[0] != ':')
          throw ParseError("expected an action keyword", key.line, key.column);
        if (k + 1 >= f.items.size()) throw ParseError("keyword '" + key.text + "' has no value", key.line, key.column);
        const auto& val = f.items[k + 1];
        if (key.text == ":parameters") {
          if (val.atom || !val.items.empty()) throw ParseError("only grounded actions are supported", val.line, val.column);
        } else if (key.text == ":precondition") {
          detail::literals(val, a.pre, nullptr);
        } else if (key.text == ":effect") {
          detail::literals(val, a.add, &a.del);
        } else if (key.text == ":cost") {
          if (!val.atom) throw ParseError("expected a cost", val.line, val.column);
          try {
            a.cost = parse_rational(val.text);
          } catch (const std::exception&) {
            throw ParseError("bad cost '" + val.text + "'", val.line, val.column);
          }
        } else {
          throw ParseError("unknown action keyword '" + key.text + "'", key.line, key.column);
        }
      }
      if (m.actions.count(a.name)) throw ParseError("duplicate action '" + a.name + "'", f.line, f.column);
      m.add_action(std::move(a));
    } else {
      throw ParseError("unknown section '" + head.text + "'", head.line, head.column);
    }
  }
  if (!have_init) throw ParseError("missing ':init'", d.line, d.column);
  if (!have_goal) throw ParseError("missing ':goal'", d.line, d.column);
  m.fluents.insert(declared.begin(), declared.end());
  m.fluents.insert(m.init.begin(), m.init.end());
  m.fluents.insert(m.goal.begin(), m.goal.end());
  return doc;
}

inline std::string serialize_strips(const PlanningModel& m, const std::string& name = "model") {
  std::ostringstream os;
  auto conj = [&](const std::set<Fluent>& pos, const std::set<Fluent>& neg) {
    os << "(and";
    for (const auto& f : pos) os << " (" << f << ")";
    for (const auto& f : neg) os << " (not (" << f << "))";
    os << ")";
  };
  os << "(define (model " << name << ")\n";
  os << "  (:fluents";
  for (const auto& f : m.fluents) os << " " << f;
  os << ")\n  (:init";
  for (const auto& f : m.init) os << " (" << f << ")";
  os << ")\n  (:goal ";
  conj(m.goal, {});
  os << ")";
  for (const auto& [n, a] : m.actions) {
    os << "\n  (:action " << n << "\n    :precondition ";
    conj(a.pre, {});
    os << "\n    :effect ";
    conj(a.add, a.del);
    os << "\n    :cost " << to_string(a.cost) << ")";
  }
  os << ")\n";
  return os.str();
}

// Either a JSON model document or STRIPS text, detected by the first non-space character.
inline PlanningModel parse_model(const std::string& text) {
  size_t i = text.find_first_not_of(" \t\r\n");
  if (i != std::string::npos && text[i] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      size_t line = 1, col = 1;
      for (size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      throw ParseError("invalid JSON", line, col);
    }
    return model_from_json(j);
  }
  return parse_strips(text).model;
}

inline json augmented_to_json(const AugmentedModel& am) {
  auto guarded = [](const std::vector<GuardedLiteral>& gs) {
    json out = json::array();
    for (const auto& g : gs) {
      json x{{"fluent", g.fluent}};
      if (g.guard) x["guard"] = *g.guard;
      out.push_back(x);
    }
    return out;
  };
  auto list = [](const std::set<Fluent>& s) { return std::vector<std::string>(s.begin(), s.end()); };
  json j;
  j["schema_version"] = kSchemaVersion;
  j["task_fluents"] = list(am.task_fluents);
  j["belief_fluents"] = list(am.belief_fluents);
  j["meta_fluents"] = json::array();
  for (const auto& m : am.meta)
    j["meta_fluents"].push_back({{"name", m.name}, {"positive", m.positive}, {"feature", m.feature.key()}});
  j["actions"] = json::array();
  for (const auto& a : am.actions) {
    static const char* kinds[] = {"task", "explanatory", "start", "finish"};
    json ja{{"name", a.name},
            {"kind", kinds[static_cast<int>(a.kind)]},
            {"pre", list(a.pre)},
            {"guarded_pre", guarded(a.guarded_pre)},
            {"add", list(a.add)},
            {"del", list(a.del)},
            {"guarded_add", guarded(a.guarded_add)},
            {"guarded_del", guarded(a.guarded_del)},
            {"cost", rational_to_json(a.cost)}};
    j["actions"].push_back(ja);
  }
  j["init"] = list(am.init);
  j["goal"] = list(am.goal);
  j["observe_execution"] = am.observe_execution;
  return j;
}

}  // namespace hap
