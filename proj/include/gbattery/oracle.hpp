// Continuum stationary moments of the damped battery oscillator, by adaptive
// quadrature. Independent of the discrete bath: used to check finite-N runs.
#pragma once

#include "gbattery/gqm.hpp"
#include "gbattery/model.hpp"

#include <complex>

namespace gb {

struct OracleConfig {
  double omega_max = 0.0;  // <= 0 means 50 omegaD
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;

  double cutoff(const ModelSpec& spec) const;
  void validate(const ModelSpec& spec) const;
  bool operator==(const OracleConfig&) const = default;
};

struct MeanForceCM {
  double q2 = 0.0;  // <Q0^2>
  double p2 = 0.0;  // <P0^2>
  double q2_error = 0.0;
  double p2_error = 0.0;
  double q2_tail = 0.0;  // contribution beyond omega_max, included in q2
  double p2_tail = 0.0;
  double resonance = 0.0;  // split point, argmin |alpha|^2
  CovarianceMatrix cm;     // diag(2 q2, 2 p2)
};

// 2 gamma / (1 - i w / omegaD)
std::complex<double> gamma_tilde(double omega, const ModelSpec& spec);

// w0^2 - w^2 - i w gamma_tilde(w)
std::complex<double> alpha(double omega, const ModelSpec& spec);

MeanForceCM stationary_moments(const ModelSpec& spec, const OracleConfig& cfg = {});
MeanForceCM mean_force_cm(const ModelSpec& spec, const OracleConfig& cfg = {});

}  // namespace gb
