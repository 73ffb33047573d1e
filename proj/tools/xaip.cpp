#include "hap/scenarios.hpp"
#include "hap/service.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using hap::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hap::SchemaError("cannot read file '" + path + "'", "");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const std::string& path) {
  std::string text = slurp(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw hap::SchemaError(std::string("invalid JSON: ") + e.what(), path);
  }
}

struct Inputs {
  std::string models, robot, mental, scenario;
  std::vector<std::string> plan;

  hap::Workspace load() const {
    hap::Workspace w;
    if (!scenario.empty()) {
      w = hap::scenario_workspace(scenario);
    } else if (!models.empty()) {
      w = hap::workspace_from_json(read_json(models));
    } else if (!robot.empty()) {
      w.robot = hap::parse_model(slurp(robot));
      if (!mental.empty()) w.mental = hap::parse_model(slurp(mental));
    } else {
      throw hap::SchemaError("one of --models, --robot or --scenario is required", "");
    }
    if (!plan.empty()) w.plan = plan;
    return w;
  }

  void add_to(CLI::App* app) {
    app->add_option("--models", models, "Workspace JSON file (robot, mental, annotated, goals, sensor)");
    app->add_option("--robot", robot, "Robot model file (JSON or STRIPS text)");
    app->add_option("--mental", mental, "Mental model file (JSON or STRIPS text)");
    app->add_option("--scenario", scenario, "Built-in scenario workspace");
    app->add_option("--plan", plan, "Plan to explain, as action names")->delimiter(',');
  }
};

void print_text(const json& j, std::ostream& os, const std::string& indent = "") {
  for (const auto& [k, v] : j.items()) {
    if (k == "schema_version") continue;
    if (v.is_object()) {
      os << indent << k << ":\n";
      print_text(v, os, indent + "  ");
    } else if (v.is_array() && !v.empty() && v[0].is_object()) {
      os << indent << k << ":\n";
      for (const auto& x : v) {
        print_text(x, os, indent + "  ");
        os << indent << "  --\n";
      }
    } else if (v.is_array()) {
      os << indent << k << ": ";
      for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
      os << "\n";
    } else if (v.is_string()) {
      std::string s = v.get<std::string>();
      if (s.find('\n') != std::string::npos) {
        os << indent << k << ":\n";
        std::istringstream is(s);
        for (std::string line; std::getline(is, line);) os << indent << "  " << line << "\n";
      } else {
        os << indent << k << ": " << s << "\n";
      }
    } else {
      os << indent << k << ": " << v.dump() << "\n";
    }
  }
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("xaip");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("XAIP_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Human-aware planning and explanation toolkit"};
  app.require_subcommand(1);
  uint64_t seed = 0;
  size_t budget = 200000;
  std::string format = "json";
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--budget", budget, "Search node budget")->capture_default_str();
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();

  Inputs in;
  std::string mode = "optimal", type = "mce", balance_mode = "optimal-balanced", ie_map = "linear";
  std::string problem, objective = "k-ambiguous", host = "127.0.0.1", scenario_name;
  std::vector<std::string> foils;
  size_t k = 2, j = 1, port = 8080, probe_budget = 200, radius = 2;
  bool secure = false;
  double alpha = 1, beta = 1, gamma = 1, message_cost = 1, slack = 0;

  auto* plan = app.add_subcommand("plan", "Synthesize a plan (optimal or explicable)");
  in.add_to(plan);
  plan->add_option("--mode", mode)->check(CLI::IsMember({"optimal", "explicable"}))->capture_default_str();
  plan->add_option("--slack", slack, "Cost slack over the robot optimum for explicable plans");

  auto* explain = app.add_subcommand("explain", "Explain a plan to the human");
  in.add_to(explain);
  explain->add_option("--type", type)
      ->check(CLI::IsMember({"ppe", "mpe", "mce", "mme", "approx", "contrastive", "conformant", "conditional", "lie"}))
      ->capture_default_str();
  explain->add_option("--foil", foils, "Foil plan as comma-separated actions (repeatable)");

  auto* design = app.add_subcommand("design", "Environment design over modification sets");
  design->add_option("--problem", problem, "Design problem JSON file");
  design->add_option("--scenario", scenario_name, "restaurant-a, restaurant-b or restaurant-c");

  auto* obfuscate = app.add_subcommand("obfuscate", "Plan that hides the true goal from an observer");
  in.add_to(obfuscate);
  obfuscate->add_option("-k", k, "Goals that must remain in the observer's belief")->capture_default_str();
  obfuscate->add_option("--objective", objective)
      ->check(CLI::IsMember({"k-ambiguous", "m-similar", "l-diverse"}))
      ->capture_default_str();
  obfuscate->add_flag("--secure", secure, "Randomized decoy goal selection");

  auto* legible = app.add_subcommand("legible", "Plan that reveals the true goal to an observer");
  in.add_to(legible);
  legible->add_option("-j", j, "Maximum goals left in the observer's belief")->capture_default_str();

  auto* balanced = app.add_subcommand("balanced", "Plan and explanation traded off jointly");
  in.add_to(balanced);
  balanced->add_option("--balance-mode", balance_mode)
      ->check(CLI::IsMember({"optimal-balanced", "perfectly-explicable", "perfectly-explicable-optimal"}))
      ->capture_default_str();
  balanced->add_option("--alpha", alpha)->capture_default_str();
  balanced->add_option("--beta", beta)->capture_default_str();
  balanced->add_option("--gamma", gamma)->capture_default_str();
  balanced->add_option("--message-cost", message_cost)->capture_default_str();
  balanced->add_option("--ie-map", ie_map)->check(CLI::IsMember({"linear", "exponential"}))->capture_default_str();

  auto* probe = app.add_subcommand("probe", "Concept-level foil answers from a black-box simulator");
  probe->add_option("--foil", foils, "Foil plan as comma-separated actions (repeatable)");
  probe->add_option("--samples", probe_budget, "Sampling budget")->capture_default_str();
  probe->add_option("--radius", radius, "Locality radius around the traces")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  auto* scenario = app.add_subcommand("scenario", "Run a built-in scenario end to end");
  scenario->add_option("name", scenario_name)->required()->check(CLI::IsMember(hap::scenario_names()));

  CLI11_PARSE(app, argc, argv);

  auto split_plan = [](const std::string& s) {
    hap::Plan p;
    std::stringstream ss(s);
    for (std::string a; std::getline(ss, a, ',');)
      if (!a.empty()) p.push_back(a);
    return p;
  };

  try {
    json out;
    if (*plan) {
      json params{{"slack", slack}};
      out = hap::run_plan(in.load(), mode, params);
    } else if (*explain) {
      json params = json::object();
      if (!foils.empty()) {
        params["foils"] = json::array();
        for (const auto& f : foils) params["foils"].push_back(split_plan(f));
      }
      out = hap::run_explain(in.load(), type, params);
    } else if (*design) {
      if (!scenario_name.empty()) out = hap::run_scenario(scenario_name, seed);
      else if (!problem.empty()) out = hap::run_design(hap::design_from_json(read_json(problem)));
      else throw hap::SchemaError("one of --problem or --scenario is required", "");
    } else if (*obfuscate) {
      out = hap::run_plan(in.load(), "obfuscate",
                          {{"k", k}, {"objective", objective}, {"secure", secure}, {"seed", seed}, {"budget", budget}});
    } else if (*legible) {
      out = hap::run_plan(in.load(), "legible", {{"j", j}, {"budget", budget}});
    } else if (*balanced) {
      out = hap::run_plan(in.load(), "balanced",
                          {{"alpha", alpha},
                           {"beta", beta},
                           {"gamma", gamma},
                           {"message_cost", message_cost},
                           {"ie_map", ie_map},
                           {"balance_mode", balance_mode}});
    } else if (*probe) {
      auto g = hap::fixtures::ladder_game();
      hap::SamplerConfig cfg;
      cfg.seed = seed;
      cfg.budget = probe_budget;
      cfg.locality_radius = radius;
      std::vector<hap::Plan> fs;
      for (const auto& f : foils) fs.push_back(split_plan(f));
      out = hap::run_probe(g.sim, g.concepts, g.plan, fs, cfg);
    } else if (*serve) {
      hap::Service service;
      httplib::Server server;
      service.bind(server);
      spdlog::info("listening on {}:{}", host, port);
      if (!server.listen(host, static_cast<int>(port))) {
        spdlog::error("cannot listen on {}:{}", host, port);
        return 1;
      }
      return 0;
    } else if (*scenario) {
      out = hap::run_scenario(scenario_name, seed);
    }
    if (format == "json") {
      std::cout << out.dump(2) << "\n";
    } else {
      print_text(out, std::cout);
    }
    return 0;
  } catch (const hap::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const hap::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const hap::SolverError& e) {
    std::cerr << "solver error (" << e.reason << "): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
