#include "gbattery/cycles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace gb {

std::string to_string(Scenario s) { return s == Scenario::Tripartite ? "tripartite" : "bipartite"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "tripartite") return Scenario::Tripartite;
  if (s == "bipartite") return Scenario::Bipartite;
  throw std::invalid_argument("scenario: expected \"tripartite\" or \"bipartite\", got \"" + s + "\"");
}

void ChargingSettings::validate() const {
  if (!(t_charge > 0.0) || !std::isfinite(t_charge)) throw std::invalid_argument("cycle.t_charge: must be > 0");
  if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("cycle.window: must lie in (0, 1]");
  if (sample_count < 1) throw std::invalid_argument("cycle.sample_count: must be >= 1");
  if (sample_count - window_begin() + 1 < 1) throw std::invalid_argument("cycle.window: contains no samples");
}

int ChargingSettings::window_begin() const {
  // samples strictly after (1 - window) t_charge
  int skip = static_cast<int>(std::llround((1.0 - window) * sample_count));
  return std::min(skip + 1, sample_count);
}

namespace {

double half_trace(const Matrix& f, const Matrix& s) { return 0.5 * f.cwiseProduct(s).sum(); }

std::vector<Index> bath_modes(int n) { return mode_range(1, n); }

double rel_change(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// H_B alone, bath slots of the S u B ordering; battery entries zeroed
Matrix bath_part(const ClModel& m) {
  Matrix h = m.h_decoupled().matrix();
  h.topLeftCorner(2, 2).setZero();
  return h;
}

}  // namespace

// ChargingWindow -----------------------------------------------------------------

ChargingWindow::ChargingWindow(const ClModel& model, const ChargingSettings& settings)
    : settings_(settings) {
  settings_.validate();
  const HamiltonianMatrix& h = model.h_coupled();
  const Index n = h.dim();
  const Matrix hb = bath_part(model);
  const Vector hb_root = hb.diagonal().cwiseMax(0.0).cwiseSqrt();
  if ((hb - Matrix(hb.diagonal().asDiagonal())).cwiseAbs().maxCoeff() != 0.0) {
    throw std::logic_error("ChargingWindow: bath Hamiltonian expected diagonal");
  }
  // V = c e0 e0^T + e0 u^T + u e0^T
  const Matrix v = model.v_full();
  const double c = v(0, 0);
  Vector u = v.col(0);
  u(0) = 0.0;

  const double step = settings_.sample_step();
  const int first = settings_.window_begin();
  const int last = settings_.sample_count;
  SymplecticTransform s_step = propagator_const(h, step);
  SymplecticTransform s_first = propagator_const(h, first * step);
  Matrix s = s_first.matrix();
  defect_ = std::max(s_step.defect(), s_first.defect());

  hb_bar_ = Matrix::Zero(n, n);
  v_bar_ = Matrix::Zero(n, n);
  qq_bar_ = Matrix::Zero(n, n);
  pp_bar_ = Matrix::Zero(n, n);
  qp_bar_ = Matrix::Zero(n, n);
  Matrix g(n, n);
  Matrix next(n, n);
  for (int j = first; j <= last; ++j) {
    if (j > first) {
      next.noalias() = s_step.matrix() * s;
      s.swap(next);
    }
    g.noalias() = hb_root.asDiagonal() * s;
    hb_bar_.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose());
    Eigen::RowVectorXd r0 = s.row(0);
    Eigen::RowVectorXd r1 = s.row(1);
    Eigen::RowVectorXd w = u.transpose() * s;
    v_bar_.noalias() += c * r0.transpose() * r0;
    v_bar_.noalias() += r0.transpose() * w;
    v_bar_.noalias() += w.transpose() * r0;
    qq_bar_.noalias() += r0.transpose() * r0;
    pp_bar_.noalias() += r1.transpose() * r1;
    qp_bar_.noalias() += 0.5 * (r0.transpose() * r1 + r1.transpose() * r0);
  }
  samples_ = last - first + 1;
  const double inv = 1.0 / samples_;
  hb_bar_ = Matrix(hb_bar_.selfadjointView<Eigen::Lower>()) * inv;
  v_bar_ *= inv;
  qq_bar_ *= inv;
  pp_bar_ *= inv;
  qp_bar_ *= inv;
  s_final_ = s;
  defect_ = std::max(defect_, gb::symplectic_defect(s_final_));
  // conservation of H under its own flow, entrywise relative to |H|
  Matrix drift = s_final_.transpose() * h.matrix() * s_final_ - h.matrix();
  energy_drift_ = drift.cwiseAbs().maxCoeff() / h.matrix().cwiseAbs().maxCoeff();
  h_bar_ = s_final_.transpose() * h.matrix() * s_final_;
}

double ChargingWindow::bath_energy(const Matrix& sigma0) const { return half_trace(hb_bar_, sigma0); }

double ChargingWindow::interaction_energy(const Matrix& sigma0) const {
  return half_trace(v_bar_, sigma0);
}

double ChargingWindow::total_energy(const Matrix& sigma0) const { return half_trace(h_bar_, sigma0); }

Matrix ChargingWindow::battery_block(const Matrix& sigma0) const {
  Matrix b(2, 2);
  b(0, 0) = qq_bar_.cwiseProduct(sigma0).sum();
  b(1, 1) = pp_bar_.cwiseProduct(sigma0).sum();
  b(0, 1) = b(1, 0) = qp_bar_.cwiseProduct(sigma0).sum();
  return b;
}

// CycleEngine ----------------------------------------------------------------------

namespace {

CovarianceMatrix fresh_bath_state(const ClModel& m) {
  std::vector<Index> b = bath_modes(m.n_bath());
  Matrix hb = sub_block(m.h_decoupled().matrix(), b);
  return thermal_cm(HamiltonianMatrix(hb), m.spec().beta);
}

// (S, B, B') ordering: battery, first bath, fresh bath
Matrix tripartite_h(const ClModel& m) {
  const int nb = m.n_bath();
  const Index n = 2 * (2 * nb + 1);
  const Matrix& h1 = m.h_coupled().matrix();
  const Matrix& h0 = m.h_decoupled().matrix();
  Matrix h = Matrix::Zero(n, n);
  // S and B' copy H_SB with B' in the bath slots
  h.topLeftCorner(2, 2) = h1.topLeftCorner(2, 2);
  const Index off = 2 * (nb + 1);
  h.block(off, off, 2 * nb, 2 * nb) = h1.bottomRightCorner(2 * nb, 2 * nb);
  h.block(0, off, 2, 2 * nb) = h1.block(0, 2, 2, 2 * nb);
  h.block(off, 0, 2 * nb, 2) = h1.block(2, 0, 2 * nb, 2);
  // B free
  h.block(2, 2, 2 * nb, 2 * nb) = h0.bottomRightCorner(2 * nb, 2 * nb);
  return h;
}

}  // namespace

CycleEngine::CycleEngine(const ClModel& model, StepperConfig stepper, ChargingSettings charging)
    : model_(model),
      stepper_(stepper),
      thermal_(thermal_cm(model.h_coupled(), model.spec().beta)),
      bath_thermal_(fresh_bath_state(model)),
      window_(model, charging),
      ref_sb_(model.h_coupled(), model.spec().beta),
      ref_tri_(HamiltonianMatrix(tripartite_h(model)), model.spec().beta) {
  stepper_.validate();
  thermal_entropy_ = von_neumann_entropy(thermal_);
  const Matrix hb = bath_part(model_);
  e_bath_th_ = half_trace(hb, thermal_.matrix());
  e_v_th_ = half_trace(model_.v_full(), thermal_.matrix());
  e_fresh_bath_ = half_trace(hb.bottomRightCorner(hb.rows() - 2, hb.cols() - 2), bath_thermal_.matrix());
  recurrence_ = recurrence_estimate(model_.bath());
}

DisconnectResult CycleEngine::disconnect(double t_d, int exponent) const {
  Protocol p{t_d, exponent};
  ProtocolPropagation prop = propagate_protocol(model_, p, stepper_, &thermal_);
  DisconnectResult d;
  d.t_d = t_d;
  d.sigma_td = evolve(thermal_, prop.transform);
  d.W_d = mean_energy(model_.h_decoupled(), d.sigma_td) - mean_energy(model_.h_coupled(), thermal_);
  std::vector<Index> s{0};
  std::vector<Index> b = bath_modes(model_.n_bath());
  d.I_td = mutual_information(d.sigma_td, s, b);
  d.symplectic_defect = prop.transform.defect();
  d.entropy_drift = t_d == 0.0 ? 0.0 : std::abs(von_neumann_entropy(d.sigma_td) - thermal_entropy_);
  d.steps = prop.steps;
  d.dt = prop.dt;
  return d;
}

CovarianceMatrix CycleEngine::tripartite_state(const DisconnectResult& d) const {
  std::vector<Index> s{0};
  ExtractionResult ex = extract(sub_block(d.sigma_td, s), model_.h_battery());
  CovarianceMatrix sw = apply_local_battery(d.sigma_td, ex.transform);
  const Index n1 = sw.dim();
  const Index n2 = bath_thermal_.dim();
  Matrix full = Matrix::Zero(n1 + n2, n1 + n2);
  full.topLeftCorner(n1, n1) = sw.matrix();
  full.bottomRightCorner(n2, n2) = bath_thermal_.matrix();
  return CovarianceMatrix(std::move(full));
}

HamiltonianMatrix CycleEngine::tripartite_hamiltonian() const {
  return HamiltonianMatrix(tripartite_h(model_));
}

namespace {

void finish(CycleReport& r, double beta) {
  r.W_diss = r.W_d + r.W_c - r.ergotropy;
  r.Q = -(r.dE_B_disc + r.dE_B_charge);
  r.Sigma = -beta * r.Q;
  r.first_law_residual = std::abs(r.W_diss - (r.dE_B_disc + r.dE_B_charge));
  double spent = r.W_d + r.W_c;
  if (spent > 0.0) {
    r.eta = r.ergotropy / spent;
  } else {
    r.flags.push_back("eta_missing");
  }
}

}  // namespace

CycleReport CycleEngine::tripartite(const DisconnectResult& d) const {
  const ModelSpec& spec = model_.spec();
  CycleReport r;
  r.scenario = Scenario::Tripartite;
  r.t_d = d.t_d;
  r.W_d = d.W_d;
  r.I_td = d.I_td;
  r.steps = d.steps;
  r.dt = d.dt;

  std::vector<Index> s{0};
  ExtractionResult ex = extract(sub_block(d.sigma_td, s), model_.h_battery());
  r.ergotropy = ex.ergotropy;
  r.W_c = connect_work_tripartite(spec, model_.bath(), ex.passive_cm);

  const Matrix hb = bath_part(model_);
  r.dE_B_disc = half_trace(hb, d.sigma_td.matrix()) - e_bath_th_;

  // S u B' right after reconnection, B' in the bath slots
  const Index n = model_.dim();
  Matrix sigma0 = Matrix::Zero(n, n);
  sigma0.topLeftCorner(2, 2) = ex.passive_cm.matrix();
  sigma0.bottomRightCorner(n - 2, n - 2) = bath_thermal_.matrix();
  r.dE_B_charge = window_.bath_energy(sigma0) - e_fresh_bath_;
  finish(r, spec.beta);

  r.second_law_value = ref_tri_.relative_entropy(tripartite_state(d));
  r.interaction_identity_residual =
      audit_interaction_identity(e_v_th_, window_.interaction_energy(sigma0));

  // diagnostics for the charging stroke
  CovarianceMatrix c0(sigma0);
  CovarianceMatrix c1 = evolve(c0, window_.final_propagator());
  double s0 = von_neumann_entropy(c0);
  r.entropy_drift = std::max(d.entropy_drift, std::abs(von_neumann_entropy(c1) - s0));
  double e0 = mean_energy(model_.h_coupled(), c0);
  r.energy_drift = rel_change(window_.total_energy(sigma0), e0);
  r.symplectic_defect = std::max(d.symplectic_defect, window_.symplectic_defect());
  if (window_.settings().t_charge >= recurrence_) r.flags.push_back("beyond_recurrence");
  return r;
}

CycleReport CycleEngine::bipartite(const DisconnectResult& d, double theta) const {
  const ModelSpec& spec = model_.spec();
  CycleReport r;
  r.scenario = Scenario::Bipartite;
  r.t_d = d.t_d;
  r.theta = theta;
  r.W_d = d.W_d;
  r.I_td = d.I_td;
  r.steps = d.steps;
  r.dt = d.dt;

  std::vector<Index> s{0};
  CovarianceMatrix sigma_S = sub_block(d.sigma_td, s);
  r.ergotropy = ergotropy(sigma_S, model_.h_battery());
  SymplecticTransform l = theta_extraction_transform(sigma_S, model_.h_battery(), theta);
  CovarianceMatrix sw = apply_local_battery(d.sigma_td, l);
  r.W_c = connect_work_bipartite(spec, model_.bath(), sw);

  const Matrix hb = bath_part(model_);
  const double e_b_td = half_trace(hb, d.sigma_td.matrix());
  r.dE_B_disc = e_b_td - e_bath_th_;
  r.dE_B_charge = window_.bath_energy(sw.matrix()) - e_b_td;
  finish(r, spec.beta);

  r.second_law_value = ref_sb_.relative_entropy(sw);
  r.interaction_identity_residual =
      audit_interaction_identity(e_v_th_, window_.interaction_energy(sw.matrix()));

  CovarianceMatrix c1 = evolve(sw, window_.final_propagator());
  double s0 = von_neumann_entropy(sw);
  r.entropy_drift = std::max({d.entropy_drift, std::abs(von_neumann_entropy(c1) - s0),
                              std::abs(s0 - thermal_entropy_)});
  r.energy_drift = rel_change(window_.total_energy(sw.matrix()), mean_energy(model_.h_coupled(), sw));
  r.symplectic_defect = std::max(d.symplectic_defect, window_.symplectic_defect());
  if (window_.settings().t_charge >= recurrence_) r.flags.push_back("beyond_recurrence");
  return r;
}

CycleReport CycleEngine::run(const CycleConfig& cfg, int exponent) const {
  if (!(cfg.charging == window_.settings())) {
    throw std::invalid_argument("CycleEngine::run: charging settings differ from the engine's");
  }
  DisconnectResult d = disconnect(cfg.t_d, exponent);
  return cfg.scenario == Scenario::Tripartite ? tripartite(d) : bipartite(d, cfg.theta);
}

// free functions ---------------------------------------------------------------------

DisconnectResult disconnect_work(const ClModel& model, const Protocol& protocol,
                                 const StepperConfig& stepper) {
  CovarianceMatrix th = thermal_cm(model.h_coupled(), model.spec().beta);
  ProtocolPropagation prop = propagate_protocol(model, protocol, stepper, &th);
  DisconnectResult d;
  d.t_d = protocol.t_d;
  d.sigma_td = evolve(th, prop.transform);
  d.W_d = mean_energy(model.h_decoupled(), d.sigma_td) - mean_energy(model.h_coupled(), th);
  std::vector<Index> s{0};
  std::vector<Index> b = bath_modes(model.n_bath());
  d.I_td = mutual_information(d.sigma_td, s, b);
  d.symplectic_defect = prop.transform.defect();
  d.steps = prop.steps;
  d.dt = prop.dt;
  return d;
}

double connect_work_tripartite(const ModelSpec& spec, const BathSample& bath,
                               const CovarianceMatrix& passive_cm) {
  return 0.25 * spec.m0 * bath.omegaR_sq * passive_cm.matrix()(0, 0);
}

double connect_work_bipartite(const ModelSpec& spec, const BathSample& bath,
                              const CovarianceMatrix& sigma_W) {
  if (sigma_W.n_modes() != spec.N + 1) throw std::invalid_argument("connect_work_bipartite: dimension mismatch");
  const Matrix& m = sigma_W.matrix();
  double corr = 0.0;
  for (int k = 0; k < spec.N; ++k) corr += bath.couplings[k] * m(0, 2 * k + 2);
  return 0.25 * spec.m0 * bath.omegaR_sq * m(0, 0) - 0.5 * corr;
}

CycleReport run_tripartite_cycle(const CycleConfig& cfg, const ClModel& model,
                                 const Protocol& protocol, const StepperConfig& stepper) {
  CycleEngine e(model, stepper, cfg.charging);
  return e.tripartite(e.disconnect(protocol.t_d, protocol.exponent));
}

CycleReport run_bipartite_cycle(const CycleConfig& cfg, const ClModel& model,
                                const Protocol& protocol, const StepperConfig& stepper) {
  CycleEngine e(model, stepper, cfg.charging);
  return e.bipartite(e.disconnect(protocol.t_d, protocol.exponent), cfg.theta);
}

double audit_interaction_identity(double v_thermal, double v_late) {
  return std::abs(v_thermal - v_late) / std::max(1.0, std::abs(v_thermal));
}

ChargingTrace charging_trace(const ChargingSettings& cfg, const CovarianceMatrix& initial,
                             const HamiltonianMatrix& h, const Matrix* discrete_mf,
                             const Matrix* continuum_mf) {
  cfg.validate();
  if (initial.dim() != h.dim()) throw std::invalid_argument("charging_trace: dimension mismatch");
  const double step = cfg.sample_step();
  SymplecticTransform s_step = propagator_const(h, step);
  // only the battery rows of S(t) are needed: R(t + step) = R(t) S(step)
  Matrix rows = Matrix::Identity(2, h.dim());
  ChargingTrace tr;
  tr.late_mean = Matrix::Zero(2, 2);
  const int first = cfg.window_begin();
  for (int i = 0; i <= cfg.sample_count; ++i) {
    if (i > 0) rows = (rows * s_step.matrix()).eval();
    Matrix b = rows * initial.matrix() * rows.transpose();
    b = 0.5 * (b + b.transpose()).eval();
    tr.t.push_back(i * step);
    tr.sigma_S.push_back(b);
    if (i >= first) tr.late_mean += b;
  }
  tr.late_mean /= static_cast<double>(cfg.sample_count - first + 1);
  auto dist = [&](const Matrix& ref) {
    double d = 0.0;
    for (int k = 0; k < 2; ++k) d = std::max(d, std::abs(tr.late_mean(k, k) / ref(k, k) - 1.0));
    return d;
  };
  if (discrete_mf) tr.distance_discrete = dist(*discrete_mf);
  if (continuum_mf) tr.distance_continuum = dist(*continuum_mf);
  tr.offdiag_ratio = std::abs(tr.late_mean(0, 1)) / std::sqrt(tr.late_mean(0, 0) * tr.late_mean(1, 1));
  return tr;
}

CovarianceMatrix quench_extracted_state(const CycleEngine& engine) {
  std::vector<Index> s{0};
  const CovarianceMatrix& th = engine.thermal();
  SymplecticTransform sw = extraction_transform(sub_block(th, s), engine.model().h_battery());
  return apply_local_battery(th, sw);
}

// sweep -----------------------------------------------------------------------------

std::vector<ThetaExtrema> theta_extrema(const std::vector<SweepCell>& cells) {
  std::vector<ThetaExtrema> out;
  for (const SweepCell& c : cells) {
    if (c.scenario != Scenario::Bipartite || !c.report) continue;
    if (out.empty() || out.back().t_d != c.t_d) {
      ThetaExtrema e;
      e.t_d = c.t_d;
      e.W_diss_min = std::numeric_limits<double>::infinity();
      e.W_diss_max = -std::numeric_limits<double>::infinity();
      out.push_back(e);
    }
    ThetaExtrema& e = out.back();
    const CycleReport& r = *c.report;
    if (r.W_diss < e.W_diss_min) {
      e.W_diss_min = r.W_diss;
      e.theta_low = c.theta;
      e.eta_max = r.eta;
    }
    if (r.W_diss > e.W_diss_max) {
      e.W_diss_max = r.W_diss;
      e.theta_high = c.theta;
      e.eta_min = r.eta;
    }
  }
  return out;
}

SweepResult sweep(const CycleEngine& engine, const SweepGrid& grid, int jobs,
                  const ProgressFn& progress) {
  if (grid.td.empty()) throw std::invalid_argument("sweep: td grid is empty");
  const bool tri = std::find(grid.scenarios.begin(), grid.scenarios.end(), Scenario::Tripartite) !=
                   grid.scenarios.end();
  const bool bi = std::find(grid.scenarios.begin(), grid.scenarios.end(), Scenario::Bipartite) !=
                  grid.scenarios.end();
  if (bi && grid.theta.empty()) throw std::invalid_argument("sweep: theta grid is empty");
  const size_t per_td = (tri ? 1 : 0) + (bi ? grid.theta.size() : 0);
  std::vector<std::vector<SweepCell>> rows(grid.td.size());

  auto work = [&](size_t i) {
    const double td = grid.td[i];
    std::vector<SweepCell>& out = rows[i];
    out.reserve(per_td);
    auto add = [&](Scenario sc, double theta) -> SweepCell& {
      out.push_back(SweepCell{sc, td, theta, std::nullopt, {}});
      return out.back();
    };
    std::optional<DisconnectResult> d;
    std::string derr;
    try {
      d = engine.disconnect(td, grid.exponent);
    } catch (const std::exception& e) {
      derr = e.what();
    }
    auto run_cell = [&](SweepCell& cell, auto&& fn) {
      if (!d) {
        cell.error = "disconnect failed: " + derr;
        return;
      }
      try {
        cell.report = fn();
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    };
    if (tri) {
      SweepCell& c = add(Scenario::Tripartite, 0.0);
      run_cell(c, [&] { return engine.tripartite(*d); });
    }
    if (bi) {
      for (double th : grid.theta) {
        SweepCell& c = add(Scenario::Bipartite, th);
        run_cell(c, [&] { return engine.bipartite(*d, th); });
      }
    }
  };

  jobs = std::max(1, jobs);
  std::atomic<size_t> next{0};
  std::atomic<size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (size_t i = next++; i < grid.td.size(); i = next++) {
      work(i);
      size_t n = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(n, grid.td.size(), grid.td[i]);
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  SweepResult res;
  for (auto& r : rows) {
    for (auto& c : r) {
      if (!c.report) ++res.failures;
      res.cells.push_back(std::move(c));
    }
  }
  res.extrema = theta_extrema(res.cells);
  return res;
}

}  // namespace gb
