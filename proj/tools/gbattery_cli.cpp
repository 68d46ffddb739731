// gbattery command line: gbattery <command> [--config PATH] [--out DIR] ...
#include "gbattery/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace {

// GB_LOG = debug | info | warn | error | off; only changes what reaches stderr
int log_threshold() {
  const char* env = std::getenv("GB_LOG");
  if (!env) return static_cast<int>(gb::LogLevel::Info);
  std::string v(env);
  if (v == "debug") return 0;
  if (v == "info") return 1;
  if (v == "warn") return 2;
  if (v == "error") return 3;
  if (v == "off") return 4;
  std::cerr << "GB_LOG: unknown level '" << v << "', using info\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian quantum battery cycles on a discrete Caldeira-Leggett bath"};
  app.require_subcommand(1, 1);

  std::string config_path;
  gb::RunOptions opt;
  std::string out, scenario;
  double td = 0, theta = 0, t_charge = 0;

  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (overrides output_dir)");
  app.add_option("--jobs", opt.jobs, "worker threads, default all cores")->check(CLI::NonNegativeNumber);

  auto* inspect = app.add_subcommand("model-inspect", "bath sample and derived quantities");
  auto* cycle = app.add_subcommand("cycle", "one charge/discharge cycle");
  auto* sweep = app.add_subcommand("sweep", "t_d x theta sweep over both scenarios");
  auto* trace = app.add_subcommand("charge-trace", "battery covariance during charging");
  auto* oracle = app.add_subcommand("oracle", "continuum stationary moments");
  auto* audit = app.add_subcommand("audit", "finite-N convergence checks");
  (void)inspect;
  (void)oracle;
  (void)audit;

  for (CLI::App* sub : {cycle, sweep, trace}) {
    sub->add_option("--td", td, "disconnection time");
    sub->add_option("--theta", theta, "extraction angle");
    sub->add_option("--scenario", scenario, "tripartite or bipartite")
        ->check(CLI::IsMember({"tripartite", "bipartite"}));
  }
  for (CLI::App* sub : {cycle, sweep, trace, audit}) {
    sub->add_option("--t-charge", t_charge, "charging time")->check(CLI::PositiveNumber);
  }
  for (CLI::App* sub : app.get_subcommands({})) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::NonNegativeNumber);
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  opt.command = chosen->get_name();
  auto given = [&](const char* name) {
    return chosen->get_option_no_throw(name) && chosen->count(name) > 0;
  };
  if (!out.empty()) opt.out = out;
  if (given("--td")) opt.td = td;
  if (given("--theta")) opt.theta = theta;
  if (given("--scenario")) opt.scenario = gb::scenario_from_string(scenario);
  if (given("--t-charge")) opt.t_charge = t_charge;

  const int threshold = log_threshold();
  std::mutex mu;
  gb::Logger log = [&](gb::LogLevel lv, const std::string& msg) {
    if (static_cast<int>(lv) < threshold) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[" << names[static_cast<int>(lv)] << "] " << msg << "\n";
  };

  try {
    gb::RunConfig cfg = config_path.empty() ? gb::RunConfig{} : gb::load_config(config_path);
    return gb::run(cfg, opt, std::cout, log);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
