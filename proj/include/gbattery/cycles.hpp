// Charge/discharge cycles: disconnect, extract, reconnect, charge. Work, heat,
// entropy production, efficiency and the consistency audits.
#pragma once

#include "gbattery/evolution.hpp"
#include "gbattery/extraction.hpp"
#include "gbattery/gqm.hpp"
#include "gbattery/model.hpp"
#include "gbattery/oracle.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gb {

enum class Scenario { Tripartite, Bipartite };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct ChargingSettings {
  double t_charge = 150.0;
  double window = 0.2;     // late fraction of t_charge that is averaged
  int sample_count = 400;  // samples on (0, t_charge]

  void validate() const;
  double sample_step() const { return t_charge / sample_count; }
  // first sample index of the late window; samples are t_i = i * step
  int window_begin() const;
  bool operator==(const ChargingSettings&) const = default;
};

struct CycleConfig {
  Scenario scenario = Scenario::Tripartite;
  double t_d = 0.0;
  double theta = 0.0;
  ChargingSettings charging;
};

struct CycleReport {
  Scenario scenario = Scenario::Tripartite;
  double t_d = 0.0;
  double theta = 0.0;
  double W_d = 0.0;
  double W_c = 0.0;
  double ergotropy = 0.0;
  double W_diss = 0.0;
  double Q = 0.0;
  double Sigma = 0.0;
  std::optional<double> eta;  // missing when W_d + W_c <= 0
  double I_td = 0.0;
  double dE_B_disc = 0.0;
  double dE_B_charge = 0.0;
  double first_law_residual = 0.0;
  double second_law_value = 0.0;
  double interaction_identity_residual = 0.0;
  std::vector<std::string> flags;
  // diagnostics, not part of the CSV row
  double symplectic_defect = 0.0;
  double entropy_drift = 0.0;
  double energy_drift = 0.0;
  long steps = 0;
  double dt = 0.0;
};

struct DisconnectResult {
  double t_d = 0.0;
  double W_d = 0.0;
  CovarianceMatrix sigma_td;  // S u B at the end of the disconnection
  double I_td = 0.0;
  double symplectic_defect = 0.0;
  double entropy_drift = 0.0;
  long steps = 0;
  double dt = 0.0;
};

// Late-window averages of quadratic observables under exp(2 Omega H_SB t):
// <F>_window = 1/2 tr[F_bar sigma0] with F_bar = mean_j S_j^T F S_j.
class ChargingWindow {
 public:
  ChargingWindow(const ClModel& model, const ChargingSettings& settings);

  const ChargingSettings& settings() const noexcept { return settings_; }
  double bath_energy(const Matrix& sigma0) const;     // <H_B>
  double interaction_energy(const Matrix& sigma0) const;  // <V>
  double total_energy(const Matrix& sigma0) const;    // <H_SB>
  // mean battery block [[2<Q^2>, <{Q,P}>], [., 2<P^2>]]
  Matrix battery_block(const Matrix& sigma0) const;
  const Matrix& final_propagator() const noexcept { return s_final_; }
  double symplectic_defect() const noexcept { return defect_; }
  double energy_drift() const noexcept { return energy_drift_; }
  int window_samples() const noexcept { return samples_; }

 private:
  ChargingSettings settings_;
  Matrix hb_bar_, v_bar_, h_bar_, qq_bar_, pp_bar_, qp_bar_;
  Matrix s_final_;
  double defect_ = 0.0;
  double energy_drift_ = 0.0;
  int samples_ = 0;
};

// Everything that depends only on the model: thermal state, charging
// averages, thermal references. Immutable after construction; share freely.
class CycleEngine {
 public:
  CycleEngine(const ClModel& model, StepperConfig stepper, ChargingSettings charging);

  const ClModel& model() const noexcept { return model_; }
  const StepperConfig& stepper() const noexcept { return stepper_; }
  const ChargingSettings& charging() const noexcept { return window_.settings(); }
  const CovarianceMatrix& thermal() const noexcept { return thermal_; }
  const CovarianceMatrix& fresh_bath_thermal() const noexcept { return bath_thermal_; }
  const ChargingWindow& window() const noexcept { return window_; }
  double thermal_entropy() const noexcept { return thermal_entropy_; }
  double recurrence() const noexcept { return recurrence_; }

  DisconnectResult disconnect(double t_d, int exponent = 11) const;
  CycleReport tripartite(const DisconnectResult& d) const;
  CycleReport bipartite(const DisconnectResult& d, double theta) const;
  CycleReport run(const CycleConfig& cfg, int exponent = 11) const;

  // Full (S, B, B') tripartite state right after reconnection, and H'.
  CovarianceMatrix tripartite_state(const DisconnectResult& d) const;
  HamiltonianMatrix tripartite_hamiltonian() const;

 private:
  ClModel model_;
  StepperConfig stepper_;
  CovarianceMatrix thermal_;
  CovarianceMatrix bath_thermal_;  // fresh bath in its own Gibbs state
  ChargingWindow window_;
  ThermalReference ref_sb_;
  ThermalReference ref_tri_;
  double thermal_entropy_ = 0.0;
  double e_bath_th_ = 0.0;
  double e_v_th_ = 0.0;
  double e_fresh_bath_ = 0.0;
  double recurrence_ = 0.0;
};

// Works ---------------------------------------------------------------------

DisconnectResult disconnect_work(const ClModel& model, const Protocol& protocol,
                                 const StepperConfig& stepper = {});

// (m0 omega_R^2 / 4) [sigma_p]_11
double connect_work_tripartite(const ModelSpec& spec, const BathSample& bath,
                               const CovarianceMatrix& passive_cm);

// (m0 omega_R^2 / 4) [sigma_W]_11 - 1/2 sum_k g_k [sigma_W]_{Q0,Qk}
double connect_work_bipartite(const ModelSpec& spec, const BathSample& bath,
                              const CovarianceMatrix& sigma_W);

CycleReport run_tripartite_cycle(const CycleConfig& cfg, const ClModel& model,
                                 const Protocol& protocol, const StepperConfig& stepper = {});
CycleReport run_bipartite_cycle(const CycleConfig& cfg, const ClModel& model,
                                const Protocol& protocol, const StepperConfig& stepper = {});

// Battery trace ---------------------------------------------------------------

struct ChargingTrace {
  std::vector<double> t;
  std::vector<Matrix> sigma_S;  // 2x2 per sample, t = 0 included
  Matrix late_mean;             // late-window mean of sigma_S
  double distance_discrete = 0.0;   // max relative entry error vs thermal_cm battery block
  double distance_continuum = 0.0;  // same vs the continuum oracle
  double offdiag_ratio = 0.0;       // |mean sigma_12| / sqrt(sigma_11 sigma_22)
};

// sigma_S(t) under exp(2 Omega h t) on sample_count + 1 points of [0, t_charge]
ChargingTrace charging_trace(const ChargingSettings& cfg, const CovarianceMatrix& initial,
                             const HamiltonianMatrix& h, const Matrix* discrete_mf = nullptr,
                             const Matrix* continuum_mf = nullptr);

// Reconnected state after a quench disconnection followed by no extraction:
// the bipartite (S_W (+) I) sigma_th (S_W (+) I)^T at t_d = 0, theta = 0.
CovarianceMatrix quench_extracted_state(const CycleEngine& engine);

// |<V>_th - <V>_late| / max(1, |<V>_th|)
double audit_interaction_identity(double v_thermal, double v_late);

// Sweep -----------------------------------------------------------------------

struct SweepGrid {
  std::vector<double> td;
  std::vector<double> theta;
  std::vector<Scenario> scenarios{Scenario::Tripartite, Scenario::Bipartite};
  int exponent = 11;
};

struct SweepCell {
  Scenario scenario = Scenario::Tripartite;
  double t_d = 0.0;
  double theta = 0.0;
  std::optional<CycleReport> report;
  std::string error;  // non-empty iff report is missing
};

// per t_d over theta: argmin W_diss gives eta_max, argmax gives eta_min
struct ThetaExtrema {
  double t_d = 0.0;
  double theta_low = 0.0;  // W_diss minimal
  double theta_high = 0.0; // W_diss maximal
  double W_diss_min = 0.0;
  double W_diss_max = 0.0;
  std::optional<double> eta_max;
  std::optional<double> eta_min;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // t_d major, tripartite first, then theta order
  std::vector<ThetaExtrema> extrema;
  int failures = 0;
};

using ProgressFn = std::function<void(size_t done, size_t total, double t_d)>;

SweepResult sweep(const CycleEngine& engine, const SweepGrid& grid, int jobs = 1,
                  const ProgressFn& progress = {});

std::vector<ThetaExtrema> theta_extrema(const std::vector<SweepCell>& cells);

}  // namespace gb
