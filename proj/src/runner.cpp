#include "gbattery/runner.hpp"

#include "gbattery/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <thread>

namespace gb {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> cmds{"model-inspect", "cycle", "sweep",
                                             "charge-trace", "oracle", "audit"};
  return cmds;
}

RunConfig effective_config(RunConfig cfg, const RunOptions& opt) {
  if (opt.out) cfg.output_dir = *opt.out;
  if (opt.t_charge) cfg.cycle.t_charge = *opt.t_charge;
  cfg.validate();
  return cfg;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double half_trace(const Matrix& f, const Matrix& s) { return 0.5 * f.cwiseProduct(s).sum(); }

struct Context {
  const RunConfig& cfg;
  const RunOptions& opt;
  std::ostream& console;
  Logger log;
  fs::path dir;
  json manifest;
  Clock::time_point start = Clock::now();

  void info(const std::string& m) const { if (log) log(LogLevel::Info, m); }
  void warn(const std::string& m) const { if (log) log(LogLevel::Warn, m); }
  void debug(const std::string& m) const { if (log) log(LogLevel::Debug, m); }

  std::string path(const char* name) const { return (dir / name).string(); }

  void write(const CsvTable& t, const char* name) {
    t.write_file(path(name));
    manifest["files"].push_back(name);
    debug(std::string("wrote ") + name);
  }

  int jobs() const {
    if (opt.jobs > 0) return opt.jobs;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  void finish() {
    manifest["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
    write_text_file(path("manifest.json"), manifest.dump(2) + "\n");
  }
};

json derived_json(const ClModel& model) {
  const BathSample& b = model.bath();
  Vector w = normal_mode_frequencies(model.h_coupled());
  json d;
  d["omegaR_sq"] = b.omegaR_sq;
  d["tail_factor"] = b.tail_factor;
  d["recurrence_estimate"] = recurrence_estimate(b);
  d["normal_mode_min"] = w.minCoeff();
  d["normal_mode_max"] = w.maxCoeff();
  d["bath_omega_min"] = *std::min_element(b.omegas.begin(), b.omegas.end());
  d["bath_omega_max"] = *std::max_element(b.omegas.begin(), b.omegas.end());
  d["warnings"] = b.warnings;
  return d;
}

void log_warnings(const Context& ctx, const ClModel& model) {
  for (const std::string& w : model.bath().warnings) ctx.warn(w);
}

json cell_json(const SweepCell& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["t_d"] = c.t_d;
  j["theta"] = c.theta;
  j["status"] = c.report ? "ok" : "error";
  if (!c.report) j["error"] = c.error;
  return j;
}

json diagnostics_json(const std::vector<SweepCell>& cells) {
  double defect = 0.0, drift = 0.0, edrift = 0.0;
  long steps = 0;
  for (const SweepCell& c : cells) {
    if (!c.report) continue;
    defect = std::max(defect, c.report->symplectic_defect);
    drift = std::max(drift, c.report->entropy_drift);
    edrift = std::max(edrift, c.report->energy_drift);
    steps = std::max(steps, c.report->steps);
  }
  json d;
  d["max_symplectic_defect"] = defect;
  d["max_entropy_drift"] = drift;
  d["max_energy_drift"] = edrift;
  d["max_steps"] = steps;
  return d;
}

// console summary of one report
void print_report(std::ostream& os, const CycleReport& r) {
  os << to_string(r.scenario) << " t_d=" << format_number(r.t_d) << " theta=" << format_number(r.theta)
     << "\n  W_d=" << format_number(r.W_d) << " W_c=" << format_number(r.W_c)
     << " ergotropy=" << format_number(r.ergotropy) << "\n  W_diss=" << format_number(r.W_diss)
     << " Q=" << format_number(r.Q) << " Sigma=" << format_number(r.Sigma)
     << "\n  eta=" << (r.eta ? format_number(*r.eta) : std::string("missing"))
     << " I_td=" << format_number(r.I_td)
     << "\n  first_law_residual=" << format_number(r.first_law_residual)
     << " second_law_value=" << format_number(r.second_law_value)
     << " identity_residual=" << format_number(r.interaction_identity_residual) << "\n";
  for (const std::string& f : r.flags) os << "  flag: " << f << "\n";
}

int report_failures(const Context& ctx, const std::vector<SweepCell>& cells) {
  int failures = 0;
  for (const SweepCell& c : cells) {
    if (c.report) continue;
    ++failures;
    ctx.console << "FAILED " << to_string(c.scenario) << " t_d=" << format_number(c.t_d)
                << " theta=" << format_number(c.theta) << ": " << c.error << "\n";
  }
  if (failures) ctx.console << failures << " of " << cells.size() << " cells failed\n";
  return failures ? 1 : 0;
}

CycleEngine make_engine(const Context& ctx, const ModelSpec& spec) {
  auto t0 = Clock::now();
  ClModel model(spec);
  log_warnings(ctx, model);
  CycleEngine engine(model, ctx.cfg.stepper, ctx.cfg.cycle);
  ctx.debug("engine ready for N=" + std::to_string(spec.N) + " in " +
            fmt("%.2f", std::chrono::duration<double>(Clock::now() - t0).count()) + " s");
  return engine;
}

// commands ---------------------------------------------------------------------------

int cmd_model_inspect(Context& ctx) {
  ClModel model(ctx.cfg.model);
  log_warnings(ctx, model);
  json d = derived_json(model);
  std::vector<Index> s{0};
  CovarianceMatrix th = thermal_cm(model.h_coupled(), ctx.cfg.model.beta);
  CovarianceMatrix bare = thermal_cm(model.h_battery(), ctx.cfg.model.beta);
  d["thermal_battery_energy"] = mean_energy(model.h_battery(), bare);
  d["mean_force_battery_q2"] = 0.5 * th.matrix()(0, 0);
  d["mean_force_battery_p2"] = 0.5 * th.matrix()(1, 1);
  ctx.manifest["derived"] = d;

  auto& os = ctx.console;
  os << "omega_R^2 = " << fmt("%.3f", d["omegaR_sq"].get<double>()) << "\n"
     << "tail factor = " << fmt("%.6g", d["tail_factor"].get<double>()) << "\n"
     << "recurrence estimate = " << fmt("%.4g", d["recurrence_estimate"].get<double>()) << "\n"
     << "normal modes in [" << fmt("%.6g", d["normal_mode_min"].get<double>()) << ", "
     << fmt("%.6g", d["normal_mode_max"].get<double>()) << "]\n"
     << "bath frequencies in [" << fmt("%.6g", d["bath_omega_min"].get<double>()) << ", "
     << fmt("%.6g", d["bath_omega_max"].get<double>()) << "]\n"
     << "thermal battery energy = " << fmt("%.8f", d["thermal_battery_energy"].get<double>()) << "\n";
  for (const std::string& w : model.bath().warnings) os << "warning: " << w << "\n";

  ctx.write(bath_table(ctx.cfg.model, model.bath()), "bath.csv");
  ctx.finish();
  return 0;
}

int cmd_cycle(Context& ctx) {
  CycleEngine engine = make_engine(ctx, ctx.cfg.model);
  CycleConfig cc;
  cc.scenario = ctx.opt.scenario.value_or(Scenario::Tripartite);
  cc.t_d = ctx.opt.td.value_or(0.0);
  cc.theta = ctx.opt.theta.value_or(0.0);
  cc.charging = ctx.cfg.cycle;
  ctx.manifest["derived"] = derived_json(engine.model());
  ctx.manifest["cell"] = {{"scenario", to_string(cc.scenario)}, {"t_d", cc.t_d}, {"theta", cc.theta}};

  SweepCell cell{cc.scenario, cc.t_d, cc.theta, std::nullopt, {}};
  try {
    cell.report = engine.run(cc, ctx.cfg.exponent);
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  std::vector<SweepCell> cells{cell};
  ctx.manifest["cells"] = json::array({cell_json(cell)});
  ctx.manifest["diagnostics"] = diagnostics_json(cells);
  if (cell.report) print_report(ctx.console, *cell.report);
  ctx.write(sweep_table(cells), "cycle.csv");
  ctx.finish();
  return report_failures(ctx, cells);
}

int cmd_sweep(Context& ctx) {
  CycleEngine engine = make_engine(ctx, ctx.cfg.model);
  SweepGrid grid;
  grid.td = ctx.cfg.td_grid;
  grid.theta = ctx.cfg.theta_grid;
  grid.scenarios = ctx.cfg.scenarios;
  if (ctx.opt.scenario) grid.scenarios = {*ctx.opt.scenario};
  if (ctx.opt.td) grid.td = {*ctx.opt.td};
  if (ctx.opt.theta) grid.theta = {*ctx.opt.theta};
  grid.exponent = ctx.cfg.exponent;

  const int jobs = ctx.jobs();
  ctx.info("sweep: " + std::to_string(grid.td.size()) + " t_d values, " +
           std::to_string(grid.theta.size()) + " theta values, " + std::to_string(jobs) + " jobs");
  auto t0 = Clock::now();
  SweepResult res = sweep(engine, grid, jobs, [&](size_t done, size_t total, double td) {
    double el = std::chrono::duration<double>(Clock::now() - t0).count();
    ctx.info("t_d=" + format_number(td) + " done (" + std::to_string(done) + "/" +
             std::to_string(total) + ", " + fmt("%.1f", el) + " s)");
  });

  ctx.manifest["derived"] = derived_json(engine.model());
  json cells = json::array();
  for (const SweepCell& c : res.cells) cells.push_back(cell_json(c));
  ctx.manifest["cells"] = cells;
  ctx.manifest["diagnostics"] = diagnostics_json(res.cells);
  ctx.manifest["failures"] = res.failures;

  ctx.write(sweep_table(res.cells), "sweep.csv");
  ctx.write(extrema_table(res.extrema), "extrema.csv");
  ctx.write(protocol_table(grid.td, grid.exponent, 201), "protocol.csv");
  ctx.finish();
  ctx.console << res.cells.size() - res.failures << " of " << res.cells.size() << " cells ok\n";
  return report_failures(ctx, res.cells);
}

// Battery covariance while charging, starting from the state right after the
// extraction stroke of the requested cell.
int cmd_charge_trace(Context& ctx) {
  CycleEngine engine = make_engine(ctx, ctx.cfg.model);
  const ClModel& model = engine.model();
  const Scenario sc = ctx.opt.scenario.value_or(Scenario::Bipartite);
  const double td = ctx.opt.td.value_or(0.0);
  const double theta = ctx.opt.theta.value_or(0.0);
  std::vector<Index> s{0};

  DisconnectResult d = engine.disconnect(td, ctx.cfg.exponent);
  CovarianceMatrix sigma0 = engine.thermal();
  if (sc == Scenario::Bipartite) {
    CovarianceMatrix bat = sub_block(d.sigma_td, s);
    sigma0 = apply_local_battery(d.sigma_td, theta_extraction_transform(bat, model.h_battery(), theta));
  } else {
    // battery plus the fresh bath, which occupies modes N+1..2N of (S, B, B')
    std::vector<Index> modes{0};
    for (Index k = 0; k < model.n_bath(); ++k) modes.push_back(model.n_bath() + 1 + k);
    sigma0 = sub_block(engine.tripartite_state(d), modes);
  }

  MeanForceCM mf = mean_force_cm(ctx.cfg.model, ctx.cfg.oracle);
  Matrix discrete = sub_block(engine.thermal(), s).matrix();
  Matrix continuum = mf.cm.matrix();
  ChargingTrace tr = charging_trace(ctx.cfg.cycle, sigma0, model.h_coupled(), &discrete, &continuum);

  ctx.manifest["derived"] = derived_json(model);
  ctx.manifest["cell"] = {{"scenario", to_string(sc)}, {"t_d", td}, {"theta", theta}};
  ctx.manifest["trace"] = {{"late_q2", 0.5 * tr.late_mean(0, 0)},
                           {"late_p2", 0.5 * tr.late_mean(1, 1)},
                           {"mf_q2", mf.q2},
                           {"mf_p2", mf.p2},
                           {"distance_discrete", tr.distance_discrete},
                           {"distance_continuum", tr.distance_continuum},
                           {"offdiag_ratio", tr.offdiag_ratio}};
  ctx.console << "late window <Q^2> = " << format_number(0.5 * tr.late_mean(0, 0))
              << " (oracle " << format_number(mf.q2) << ")\n"
              << "late window <P^2> = " << format_number(0.5 * tr.late_mean(1, 1))
              << " (oracle " << format_number(mf.p2) << ")\n"
              << "relative distance: discrete " << format_number(tr.distance_discrete)
              << ", continuum " << format_number(tr.distance_continuum) << "\n"
              << "off-diagonal ratio " << format_number(tr.offdiag_ratio) << "\n";
  // reference columns hold <Q^2> and <P^2>; sigma columns hold 2<Q^2> etc.
  ctx.write(trace_table(tr, mf.q2, mf.p2), "trace.csv");
  ctx.finish();
  return 0;
}

json oracle_json(const ModelSpec& spec, const MeanForceCM& mf) {
  return {{"beta", spec.beta},         {"gamma", spec.gamma},       {"omegaD", spec.omegaD},
          {"omega0", spec.omega0},     {"m0", spec.m0},             {"q2", mf.q2},
          {"p2", mf.p2},               {"q2_error", mf.q2_error},   {"p2_error", mf.p2_error},
          {"q2_tail", mf.q2_tail},     {"p2_tail", mf.p2_tail},     {"resonance", mf.resonance}};
}

int cmd_oracle(Context& ctx) {
  const ModelSpec& spec = ctx.cfg.model;
  MeanForceCM mf = mean_force_cm(spec, ctx.cfg.oracle);
  ctx.manifest["oracle"] = oracle_json(spec, mf);
  CsvTable t({"beta", "gamma", "omegaD", "omega0", "m0", "q2", "p2", "q2_error", "p2_error",
              "q2_tail", "p2_tail", "resonance"});
  t.add_row({format_number(spec.beta), format_number(spec.gamma), format_number(spec.omegaD),
             format_number(spec.omega0), format_number(spec.m0), format_number(mf.q2),
             format_number(mf.p2), format_number(mf.q2_error), format_number(mf.p2_error),
             format_number(mf.q2_tail), format_number(mf.p2_tail), format_number(mf.resonance)});
  ctx.console << "<Q^2> = " << format_number(mf.q2) << " +- " << format_number(mf.q2_error) << "\n"
              << "<P^2> = " << format_number(mf.p2) << " +- " << format_number(mf.p2_error) << "\n";
  ctx.write(t, "oracle.csv");
  ctx.finish();
  return 0;
}

// Finite-N checks on the quench state: interaction identity and late-window
// distance to the continuum moments, for each N.
int cmd_audit(Context& ctx) {
  MeanForceCM mf = mean_force_cm(ctx.cfg.model, ctx.cfg.oracle);
  Matrix continuum = mf.cm.matrix();
  std::vector<Index> s{0};
  CsvTable t({"N", "identity_residual", "v_thermal", "v_late", "late_q2", "late_p2", "mf_q2", "mf_p2",
              "distance_discrete", "distance_continuum", "offdiag_ratio", "recurrence"});
  json rows = json::array();
  for (int n : ctx.cfg.audit.N_values) {
    ModelSpec spec = ctx.cfg.model;
    spec.N = n;
    CycleEngine engine = make_engine(ctx, spec);
    CovarianceMatrix q = quench_extracted_state(engine);
    const double v_th = half_trace(engine.model().v_full(), engine.thermal().matrix());
    const double v_late = engine.window().interaction_energy(q.matrix());
    const double ident = audit_interaction_identity(v_th, v_late);
    Matrix discrete = sub_block(engine.thermal(), s).matrix();
    ChargingTrace tr =
        charging_trace(ctx.cfg.cycle, q, engine.model().h_coupled(), &discrete, &continuum);
    t.add_row({std::to_string(n), format_number(ident), format_number(v_th), format_number(v_late),
               format_number(0.5 * tr.late_mean(0, 0)), format_number(0.5 * tr.late_mean(1, 1)),
               format_number(mf.q2), format_number(mf.p2), format_number(tr.distance_discrete),
               format_number(tr.distance_continuum), format_number(tr.offdiag_ratio),
               format_number(engine.recurrence())});
    rows.push_back({{"N", n},
                    {"identity_residual", ident},
                    {"distance_continuum", tr.distance_continuum},
                    {"offdiag_ratio", tr.offdiag_ratio}});
    ctx.console << "N=" << n << " identity residual " << fmt("%.4e", ident) << ", oracle distance "
                << fmt("%.4e", tr.distance_continuum) << ", off-diagonal " << fmt("%.4e", tr.offdiag_ratio)
                << "\n";
  }
  ctx.manifest["audit"] = rows;
  ctx.write(t, "audit.csv");
  ctx.finish();
  return 0;
}

}  // namespace

int run(const RunConfig& cfg_in, const RunOptions& opt, std::ostream& console, const Logger& log) {
  const auto& cmds = subcommands();
  if (std::find(cmds.begin(), cmds.end(), opt.command) == cmds.end()) {
    console << "unknown command: " << opt.command << "\n";
    return 2;
  }
  const RunConfig cfg = effective_config(cfg_in, opt);
  Context ctx{cfg, opt, console, log, fs::path(cfg.output_dir), json::object()};
  fs::create_directories(ctx.dir);
  ctx.manifest["version"] = kVersion;
  ctx.manifest["command"] = opt.command;
  ctx.manifest["config"] = json::parse(emit_config(cfg));
  ctx.manifest["files"] = json::array();
  if (opt.td) ctx.manifest["options"]["td"] = *opt.td;
  if (opt.theta) ctx.manifest["options"]["theta"] = *opt.theta;
  if (opt.scenario) ctx.manifest["options"]["scenario"] = to_string(*opt.scenario);
  ctx.info(opt.command + " -> " + cfg.output_dir);

  if (opt.command == "model-inspect") return cmd_model_inspect(ctx);
  if (opt.command == "cycle") return cmd_cycle(ctx);
  if (opt.command == "sweep") return cmd_sweep(ctx);
  if (opt.command == "charge-trace") return cmd_charge_trace(ctx);
  if (opt.command == "oracle") return cmd_oracle(ctx);
  return cmd_audit(ctx);
}

}  // namespace gb
