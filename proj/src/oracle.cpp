#include "gbattery/oracle.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <string>

namespace gb {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();
using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
constexpr unsigned kMaxDepth = 40;

// w coth(beta w / 2), finite at w = 0
double w_coth(double w, double beta) {
  if (w == 0.0) return 2.0 / beta;
  return w * (1.0 + 2.0 / std::expm1(beta * w));
}

struct Piece {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Piece integrate(F&& f, double a, double b, double rel_tol) {
  Piece p;
  p.value = GK::integrate(f, a, b, kMaxDepth, rel_tol, &p.error);
  return p;
}

// integral of f over [c, inf) through w = c / u
template <class F>
Piece integrate_tail(F&& f, double c, double rel_tol) {
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    double w = c / u;
    return f(w) * c / (u * u);
  };
  return integrate(g, 0.0, 1.0, rel_tol);
}

}  // namespace

double OracleConfig::cutoff(const ModelSpec& spec) const {
  return omega_max > 0.0 ? omega_max : 50.0 * spec.omegaD;
}

void OracleConfig::validate(const ModelSpec& spec) const {
  if (!(cutoff(spec) > spec.omegaD)) throw std::invalid_argument("oracle.omega_max: must exceed omegaD");
  if (!(abs_tol > 0.0)) throw std::invalid_argument("oracle.abs_tol: must be > 0");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("oracle.rel_tol: must be > 0");
}

std::complex<double> gamma_tilde(double omega, const ModelSpec& spec) {
  return 2.0 * spec.gamma / std::complex<double>(1.0, -omega / spec.omegaD);
}

std::complex<double> alpha(double omega, const ModelSpec& spec) {
  return spec.omega0 * spec.omega0 - omega * omega -
         std::complex<double>(0.0, omega) * gamma_tilde(omega, spec);
}

MeanForceCM stationary_moments(const ModelSpec& spec, const OracleConfig& cfg) {
  spec.validate();
  cfg.validate(spec);
  const double beta = spec.beta;
  const double wmax = cfg.cutoff(spec);

  // Re gamma_tilde / |alpha|^2, shared by both moments
  auto kernel = [&](double w) {
    double re = 2.0 * spec.gamma / (1.0 + (w / spec.omegaD) * (w / spec.omegaD));
    return re / std::norm(alpha(w, spec));
  };
  auto fq = [&](double w) { return w_coth(w, beta) * kernel(w); };
  auto fp = [&](double w) { return w * w * w_coth(w, beta) * kernel(w); };

  // bracket the resonance on a coarse grid, then polish
  const double span = 3.0 * spec.omega0 + spec.omegaD;
  auto a2 = [&](double w) { return std::norm(alpha(w, spec)); };
  const int grid = 2000;
  int best = 0;
  double best_val = a2(0.0);
  for (int i = 1; i <= grid; ++i) {
    double v = a2(span * i / grid);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = span * std::max(best - 1, 0) / grid;
  double hi = span * std::min(best + 1, grid) / grid;
  double wres = boost::math::tools::brent_find_minima(a2, lo, hi, 52).first;
  wres = std::clamp(wres, 1e-12, wmax * 0.5);

  MeanForceCM r;
  r.resonance = wres;
  auto total = [&](auto&& f, double& tail_out) {
    Piece a = integrate(f, 0.0, wres, cfg.rel_tol);
    Piece b = integrate(f, wres, wmax, cfg.rel_tol);
    Piece t = integrate_tail(f, wmax, cfg.rel_tol);
    tail_out = t.value;
    Piece out;
    out.value = a.value + b.value + t.value;
    out.error = a.error + b.error + t.error;
    return out;
  };
  Piece q = total(fq, r.q2_tail);
  Piece p = total(fp, r.p2_tail);
  const double cq = 1.0 / (kPi * spec.m0);
  const double cp = spec.m0 / kPi;
  r.q2 = cq * q.value;
  r.p2 = cp * p.value;
  r.q2_error = cq * q.error;
  r.p2_error = cp * p.error;
  r.q2_tail *= cq;
  r.p2_tail *= cp;
  auto check = [&](double v, double e, const char* what) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw NumericalError(std::string("stationary_moments: non-positive ") + what);
    }
    if (e > std::max(cfg.abs_tol, 10.0 * cfg.rel_tol * std::abs(v))) {
      throw NumericalError(std::string("stationary_moments: quadrature for ") + what +
                           " did not converge (error estimate " + std::to_string(e) + ")");
    }
  };
  check(r.q2, r.q2_error, "<Q0^2>");
  check(r.p2, r.p2_error, "<P0^2>");
  Matrix cm = Matrix::Zero(2, 2);
  cm(0, 0) = 2.0 * r.q2;
  cm(1, 1) = 2.0 * r.p2;
  r.cm = CovarianceMatrix(std::move(cm));
  return r;
}

MeanForceCM mean_force_cm(const ModelSpec& spec, const OracleConfig& cfg) {
  MeanForceCM r = stationary_moments(spec, cfg);
  double nu = std::sqrt(r.cm.matrix()(0, 0) * r.cm.matrix()(1, 1));
  if (nu < 1.0 - 1e-9) throw NumericalError("mean_force_cm: continuum moments are unphysical (nu < 1)");
  return r;
}

}  // namespace gb
