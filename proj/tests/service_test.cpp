#include "hap/scenarios.hpp"
#include "hap/service.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace hap;

namespace {

struct Client {
  Service svc;

  Reply call(const std::string& method, const std::string& path, const json& body = json()) {
    return svc.handle(method, path, body.is_null() ? "" : body.dump());
  }

  std::string session(const std::string& scenario) {
    auto r = call("POST", "/sessions", workspace_to_json(scenario_workspace(scenario)));
    EXPECT_EQ(r.status, 201);
    return r.body["id"];
  }
};

}  // namespace

TEST(Service, Health) {
  Client c;
  auto r = c.call("GET", "/health");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
  EXPECT_EQ(r.body["schema_version"], kSchemaVersion);
  EXPECT_EQ(c.call("GET", "/nowhere").status, 404);
}

TEST(Service, SessionsAndModels) {
  Client c;
  auto empty = c.call("POST", "/sessions");
  EXPECT_EQ(empty.status, 201);
  std::string id = empty.body["id"];
  EXPECT_EQ(c.call("POST", "/sessions/" + id + "/plan", {{"mode", "optimal"}}).status, 400);

  auto models = workspace_to_json(scenario_workspace("fetch"));
  auto put = c.call("PUT", "/sessions/" + id + "/models", models);
  EXPECT_EQ(put.status, 200);
  EXPECT_EQ(put.body["version"], 1);
  auto got = c.call("GET", "/sessions/" + id + "/models");
  EXPECT_EQ(got.status, 200);
  EXPECT_EQ(got.body["robot"], models["robot"]);

  auto stale = models;
  stale["version"] = 0;
  EXPECT_EQ(c.call("PUT", "/sessions/" + id + "/models", stale).status, 409);
  stale["version"] = 1;
  EXPECT_EQ(c.call("PUT", "/sessions/" + id + "/models", stale).status, 200);

  EXPECT_EQ(c.call("GET", "/sessions/nope/models").status, 404);
  EXPECT_EQ(c.svc.handle("PUT", "/sessions/" + id + "/models", "{not json").status, 400);
  auto bad = c.call("PUT", "/sessions/" + id + "/models", {{"robot", {{"actions", 3}}}});
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["path"], "/robot/actions");
}

TEST(Service, PlanModes) {
  Client c;
  std::string fetch = c.session("fetch");
  auto opt = c.call("POST", "/sessions/" + fetch + "/plan", {{"mode", "optimal"}});
  EXPECT_EQ(opt.status, 200);
  EXPECT_EQ(opt.body["cost"], 4);
  auto exp = c.call("POST", "/sessions/" + fetch + "/plan", {{"mode", "explicable"}, {"params", {{"slack", 2}}}});
  EXPECT_EQ(exp.status, 200);
  EXPECT_TRUE(exp.body.contains("ie"));
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/plan", {{"mode", "sideways"}}).status, 400);
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/plan", {{"params", {}}}).status, 400);

  std::string usar = c.session("usar-balanced");
  auto bal = c.call("POST", "/sessions/" + usar + "/plan",
                    {{"mode", "balanced"}, {"params", {{"balance_mode", "perfectly-explicable"}, {"message_cost", 50}}}});
  EXPECT_EQ(bal.status, 200);
  EXPECT_EQ(bal.body["balance_mode"], "perfectly-explicable");

  auto identity = workspace_to_json(scenario_workspace("grid"));
  identity["sensor"] = "identity";
  std::string grid = c.call("POST", "/sessions", identity).body["id"];
  auto leg = c.call("POST", "/sessions/" + grid + "/plan", {{"mode", "legible"}, {"params", {{"j", 1}}}});
  EXPECT_EQ(leg.status, 200);
  auto belief = c.call("GET", "/sessions/" + grid + "/belief");
  EXPECT_EQ(belief.status, 200);
  EXPECT_EQ(belief.body["mode"], "legible");
  EXPECT_EQ(belief.body["steps"].size(), leg.body["plan"].size());
  EXPECT_EQ(belief.body["goals_in_final_belief"].size(), 1u);

  std::string columns = c.session("grid");
  auto obf = c.call("POST", "/sessions/" + columns + "/plan", {{"mode", "obfuscate"}, {"params", {{"k", 3}}}});
  EXPECT_EQ(obf.status, 200);
  EXPECT_EQ(c.call("GET", "/sessions/" + columns + "/belief").body["goals_in_final_belief"].size(), 3u);
  EXPECT_EQ(c.call("POST", "/sessions/" + grid + "/plan", {{"mode", "obfuscate"}, {"params", {{"k", 3}}}}).status, 422);

  auto none = c.call("POST", "/sessions/" + columns + "/plan", {{"mode", "legible"}, {"params", {{"j", 1}}}});
  EXPECT_EQ(none.status, 422);
  EXPECT_TRUE(none.body.contains("reason"));
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/plan", {{"mode", "legible"}}).status, 400);
}

TEST(Service, ExplanationTypes) {
  Client c;
  std::string fetch = c.session("fetch");
  for (const char* t : {"ppe", "mpe", "mce", "mme", "approx", "lie"}) {
    auto r = c.call("POST", "/sessions/" + fetch + "/explain", {{"type", t}});
    EXPECT_EQ(r.status, 200) << t;
    EXPECT_EQ(r.body["type"], t);
    EXPECT_FALSE(r.body["edits"].empty()) << t;
  }
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/explain", {{"type", "mce"}}).body["edits"].size(), 1u);
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/explain", {{"type", "mme"}}).body["edits"].size(), 2u);

  auto con = c.call("POST", "/sessions/" + fetch + "/explain",
                    {{"type", "contrastive"}, {"foils", {{"pick-up_b1_loc1", "move_loc1_loc2", "put-down_b1_loc2"}}}});
  EXPECT_NE(con.status, 400);
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/explain", {{"type", "contrastive"}}).status, 400);
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/explain", {{"type", "contrastive"}, {"foils", "x"}}).status, 400);
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/explain", {{"type", "riddle"}}).status, 400);
  EXPECT_EQ(c.call("POST", "/sessions/" + fetch + "/explain", {{"type", "conformant"}}).status, 400);

  auto invalid = c.call("POST", "/sessions/" + fetch + "/explain", {{"type", "mce"}, {"params", {{"plan", {"tuck"}}}}});
  EXPECT_EQ(invalid.status, 422);
  EXPECT_EQ(invalid.body["reason"], "invalid_plan");

  std::string usar = c.session("usar-uncertain");
  auto conf = c.call("POST", "/sessions/" + usar + "/explain", {{"type", "conformant"}});
  EXPECT_EQ(conf.status, 200);
  EXPECT_FALSE(conf.body["edits"].empty());
  std::string dialog = c.session("usar-dialogue");
  auto cond = c.call("POST", "/sessions/" + dialog + "/explain", {{"type", "conditional"}});
  EXPECT_EQ(cond.status, 200);
  EXPECT_EQ(cond.body["policy"]["kind"], "ask");
}

TEST(Service, AcceptingEditsReconcilesModels) {
  Client c;
  std::string id = c.session("fetch");
  auto mme = c.call("POST", "/sessions/" + id + "/explain", {{"type", "mme"}});
  ASSERT_EQ(mme.status, 200);
  for (const auto& e : mme.body["edits"]) {
    auto r = c.call("POST", "/sessions/" + id + "/edits/" + e["edit_id"].get<std::string>() + "/accept");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body["status"], "accepted");
  }
  auto again = c.call("POST", "/sessions/" + id + "/explain", {{"type", "mce"}});
  EXPECT_EQ(again.status, 200);
  EXPECT_TRUE(again.body["edits"].empty());
  std::string first = mme.body["edits"][0]["edit_id"];
  EXPECT_EQ(c.call("POST", "/sessions/" + id + "/edits/" + first + "/reject").status, 409);
  EXPECT_EQ(c.call("POST", "/sessions/" + id + "/edits/e999/accept").status, 404);
}

TEST(Service, RejectedEditsAreWithheld) {
  Client c;
  std::string id = c.session("fetch");
  auto mce = c.call("POST", "/sessions/" + id + "/explain", {{"type", "mce"}});
  std::string eid = mce.body["edits"][0]["edit_id"];
  std::string feature = mce.body["edits"][0]["feature"];
  EXPECT_EQ(c.call("POST", "/sessions/" + id + "/edits/" + eid + "/reject").body["status"], "rejected");
  auto after = c.call("POST", "/sessions/" + id + "/explain", {{"type", "mce"}});
  EXPECT_EQ(after.status, 200);
  for (const auto& e : after.body["edits"]) EXPECT_NE(e["feature"], feature);
  EXPECT_FALSE(after.body["withheld"].empty());
  EXPECT_FALSE(after.body["complete"].get<bool>());

  auto mme = c.call("POST", "/sessions/" + id + "/explain", {{"type", "mme"}});
  std::string pending = mme.body["edits"][0]["edit_id"];
  c.call("PUT", "/sessions/" + id + "/models", workspace_to_json(scenario_workspace("fetch")));
  auto stale = c.call("POST", "/sessions/" + id + "/edits/" + pending + "/accept");
  EXPECT_EQ(stale.status, 409);
}

TEST(Service, LiveServer) {
  Service svc;
  httplib::Server server;
  svc.bind(server);
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto created = cli.Post("/sessions", workspace_to_json(scenario_workspace("fetch")).dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  std::string id = json::parse(created->body)["id"];

  json foil{{"type", "contrastive"}, {"foils", {{"pick-up_b1_loc1", "move_loc1_loc2", "put-down_b1_loc2"}}}};
  auto con = cli.Post("/sessions/" + id + "/explain", foil.dump(), "application/json");
  ASSERT_TRUE(con);
  auto cj = json::parse(con->body);
  EXPECT_EQ(cj["schema_version"], kSchemaVersion);

  auto mce = cli.Post("/sessions/" + id + "/explain", json{{"type", "mce"}}.dump(), "application/json");
  ASSERT_TRUE(mce);
  std::string eid = json::parse(mce->body)["edits"][0]["edit_id"];
  auto acc = cli.Post("/sessions/" + id + "/edits/" + eid + "/accept", "", "application/json");
  ASSERT_TRUE(acc);
  EXPECT_EQ(acc->status, 200);
  auto done = cli.Post("/sessions/" + id + "/explain", json{{"type", "mce"}}.dump(), "application/json");
  EXPECT_TRUE(json::parse(done->body)["edits"].empty());

  auto missing = cli.Get("/sessions/zzz/belief");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto bad = cli.Post("/sessions", "[", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  server.stop();
  t.join();
}

TEST(Service, ConcurrentSessions) {
  Service svc;
  std::vector<std::thread> ts;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    ts.emplace_back([&] {
      auto r = svc.handle("POST", "/sessions", workspace_to_json(scenario_workspace("fetch")).dump());
      std::string id = r.body["id"];
      if (svc.handle("POST", "/sessions/" + id + "/explain", json{{"type", "mce"}}.dump()).status == 200) ++ok;
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_EQ(ok, 8);
  EXPECT_EQ(svc.session_count(), 8u);
}
