#pragma once

#include "hap/ops.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <memory>
#include <mutex>
#include <shared_mutex>

namespace hap {

struct Reply {
  int status = 200;
  json body;
};

struct EditRecord {
  std::string id;
  Edit edit;
  std::string status = "pending";
  size_t models_revision = 0;
};

struct Session {
  std::string id;
  std::optional<Workspace> ws;
  size_t version = 0;
  size_t models_revision = 0;
  std::map<std::string, EditRecord> edits;
  std::set<std::string> vetoed;
  json belief = json::object();
  size_t next_edit = 1;
  std::mutex busy;
};

class Service {
 public:
  Reply handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      return route(method, split(path), body);
    } catch (const SchemaError& e) {
      return error(400, "schema", e.what(), e.path);
    } catch (const json::exception& e) {
      return error(400, "schema", e.what(), "");
    } catch (const SolverError& e) {
      return error(422, "solver", e.what(), "", e.reason);
    } catch (const std::exception& e) {
      return error(422, "solver", e.what(), "", "internal");
    }
  }

  void bind(httplib::Server& server) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      Reply r = handle(req.method, req.path, req.body);
      spdlog::debug("{} {} -> {}", req.method, req.path, r.status);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Put(".*", forward);
  }

  size_t session_count() const {
    std::shared_lock lock(mu_);
    return sessions_.size();
  }

 private:
  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : path) {
      if (c == '/') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  }

  static Reply error(int status, const std::string& kind, const std::string& message, const std::string& path,
                     const std::string& reason = "") {
    json b{{"schema_version", kSchemaVersion}, {"error", kind}, {"message", message}};
    if (!path.empty()) b["path"] = path;
    if (!reason.empty()) b["reason"] = reason;
    return {status, b};
  }

  static json parse_body(const std::string& body) {
    if (body.empty()) return json::object();
    try {
      return json::parse(body);
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), "");
    }
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  static const Workspace& workspace(const Session& s) {
    if (!s.ws) throw SchemaError("session has no models", "/robot");
    return *s.ws;
  }

  static json models_json(const Session& s) {
    json j = s.ws ? workspace_to_json(*s.ws) : json{{"schema_version", kSchemaVersion}};
    j["version"] = s.version;
    return j;
  }

  Reply route(const std::string& method, const std::vector<std::string>& parts, const std::string& body) {
    if (parts.size() == 1 && parts[0] == "health" && method == "GET")
      return {200, {{"schema_version", kSchemaVersion}, {"status", "ok"}, {"sessions", session_count()}}};
    if (parts.empty() || parts[0] != "sessions") return error(404, "not_found", "no such route", "");
    if (parts.size() == 1) {
      if (method != "POST") return error(404, "not_found", "no such route", "");
      return create(parse_body(body));
    }
    auto s = find(parts[1]);
    if (!s) return error(404, "session", "unknown session '" + parts[1] + "'", "");
    std::unique_lock busy(s->busy, std::try_to_lock);
    if (!busy.owns_lock()) return error(409, "conflict", "another request on this session is in progress", "");
    if (parts.size() == 3 && parts[2] == "models") {
      if (method == "GET") return {200, models_json(*s)};
      if (method == "PUT") return put_models(*s, parse_body(body));
    }
    if (parts.size() == 3 && parts[2] == "plan" && method == "POST") return plan(*s, parse_body(body));
    if (parts.size() == 3 && parts[2] == "explain" && method == "POST") return explain(*s, parse_body(body));
    if (parts.size() == 3 && parts[2] == "belief" && method == "GET") return {200, s->belief};
    if (parts.size() == 5 && parts[2] == "edits" && method == "POST" && (parts[4] == "accept" || parts[4] == "reject"))
      return decide(*s, parts[3], parts[4] == "accept");
    return error(404, "not_found", "no such route", "");
  }

  Reply create(const json& j) {
    auto s = std::make_shared<Session>();
    if (j.is_object() && j.contains("robot")) s->ws = workspace_from_json(j);
    s->id = "s" + std::to_string(++counter_);
    s->belief = {{"schema_version", kSchemaVersion}, {"steps", json::array()}};
    {
      std::unique_lock lock(mu_);
      sessions_[s->id] = s;
    }
    return {201, {{"schema_version", kSchemaVersion}, {"id", s->id}, {"version", s->version}}};
  }

  Reply put_models(Session& s, const json& j) {
    if (j.contains("version")) {
      if (!j["version"].is_number_integer()) throw SchemaError("expected an integer", "/version");
      if (j["version"].get<size_t>() != s.version)
        return error(409, "conflict", "models were modified since version " + j["version"].dump(), "/version");
    }
    s.ws = workspace_from_json(j);
    ++s.version;
    ++s.models_revision;
    return {200, models_json(s)};
  }

  Reply plan(Session& s, const json& j) {
    auto mode = detail::string_at(detail::field(j, "mode", ""), "/mode");
    json params = j.value("params", json::object());
    if (!params.is_object()) throw SchemaError("expected an object", "/params");
    json out = run_plan(workspace(s), mode, params);
    if (mode == "legible" || mode == "obfuscate") {
      s.belief = belief_trace(workspace(s), out["plan"].get<Plan>());
      s.belief["schema_version"] = kSchemaVersion;
      s.belief["mode"] = mode;
    }
    return {200, out};
  }

  Reply explain(Session& s, const json& j) {
    auto type = detail::string_at(detail::field(j, "type", ""), "/type");
    json params = j.value("params", json::object());
    if (!params.is_object()) throw SchemaError("expected an object", "/params");
    if (j.contains("foils")) params["foils"] = j["foils"];
    json out = run_explain(workspace(s), type, params, s.vetoed);
    if (out.contains("edits")) {
      for (auto& e : out["edits"]) {
        EditRecord r;
        r.id = "e" + std::to_string(s.next_edit++);
        r.edit = edit_from_json(e);
        r.models_revision = s.models_revision;
        e["edit_id"] = r.id;
        s.edits[r.id] = r;
      }
    }
    return {200, out};
  }

  Reply decide(Session& s, const std::string& edit_id, bool accept) {
    auto it = s.edits.find(edit_id);
    if (it == s.edits.end()) return error(404, "edit", "unknown edit '" + edit_id + "'", "");
    EditRecord& r = it->second;
    if (r.status != "pending") return error(409, "conflict", "edit '" + edit_id + "' was already " + r.status, "");
    if (r.models_revision != s.models_revision)
      return error(409, "conflict", "models were replaced after edit '" + edit_id + "' was proposed", "");
    if (accept) {
      Workspace& w = *s.ws;
      if (w.annotated) w.annotated = apply_annotated_edits(*w.annotated, {r.edit});
      if (w.mental && !r.edit.annotation) {
        std::set<Fluent> extra = w.robot.fluents;
        w.mental = apply_explanation(*w.mental, {r.edit}, extra);
      }
      r.status = "accepted";
    } else {
      s.vetoed.insert(r.edit.key());
      r.status = "rejected";
    }
    ++s.version;
    return {200,
            {{"schema_version", kSchemaVersion}, {"edit_id", edit_id}, {"status", r.status}, {"version", s.version}}};
  }

  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<size_t> counter_{0};
};

}  // namespace hap
