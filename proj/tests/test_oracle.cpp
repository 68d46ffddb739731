#include "support.hpp"

#include "gbattery/oracle.hpp"

#include <doctest.h>

#include <numbers>

using namespace gb;
using namespace gbtest;

namespace {

// plain composite Simpson on w = c tan(u), u in (0, pi/2)
struct Moments {
  double q2, p2;
};

Moments simpson_moments(const ModelSpec& s, int n = 400000) {
  const double pi = std::numbers::pi;
  const double c = s.omega0;
  auto f = [&](double u, double& fq, double& fp) {
    double w = c * std::tan(u);
    double jac = c / (std::cos(u) * std::cos(u));
    double r = w / s.omegaD;
    double re = 2.0 * s.gamma / (1.0 + r * r);
    double im = 2.0 * s.gamma * r / (1.0 + r * r);  // Im gamma_tilde
    double ar = s.omega0 * s.omega0 - w * w + w * im;
    double ai = -w * re;
    double wc = w > 0 ? w / std::tanh(0.5 * s.beta * w) : 2.0 / s.beta;
    double k = wc * re / (ar * ar + ai * ai) * jac;
    fq = k;
    fp = w * w * k;
  };
  const double h = 0.5 * pi / n;
  double sq = 0.0, sp = 0.0;
  for (int i = 0; i < n; ++i) {  // last node (u = pi/2) carries zero weight in the limit
    double fq, fp;
    f(i * h, fq, fp);
    double wgt = (i == 0) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sq += wgt * fq;
    sp += wgt * fp;
  }
  return {sq * h / 3.0 / (pi * s.m0), sp * h / 3.0 * s.m0 / pi};
}

}  // namespace

TEST_CASE("default continuum moments") {
  ModelSpec s;
  MeanForceCM mf = stationary_moments(s);
  Moments ref = simpson_moments(s);
  CHECK(mf.q2 == doctest::Approx(ref.q2).epsilon(1e-7));
  CHECK(mf.p2 == doctest::Approx(ref.p2).epsilon(1e-6));
  CHECK(mf.q2 == doctest::Approx(0.21077).epsilon(1e-4));
  CHECK(mf.p2 == doctest::Approx(1.49030).epsilon(1e-4));
  CHECK(mf.q2_error < 1e-8);
  CHECK(mf.cm.matrix()(0, 0) == doctest::Approx(2.0 * mf.q2));
}

TEST_CASE("weak coupling recovers the bare oscillator within 0.1%") {
  ModelSpec s;
  s.gamma = 1e-3;
  MeanForceCM mf = stationary_moments(s);
  const double c = 1.0 / std::tanh(0.5 * s.beta * s.omega0);
  CHECK(std::abs(mf.q2 / (c / (2.0 * s.m0 * s.omega0)) - 1.0) < 1e-3);
  CHECK(std::abs(mf.p2 / (0.5 * s.m0 * s.omega0 * c) - 1.0) < 1e-3);
}

TEST_CASE("gamma tilde real part is J / (m0 w)") {
  ModelSpec s;
  for (double w : {0.01, 0.3, 1.0, 2.7, 11.0, 80.0}) {
    CHECK(gamma_tilde(w, s).real() * s.m0 * w == doctest::Approx(spectral_density(w, s)).epsilon(1e-14));
  }
  CHECK(gamma_tilde(0.0, s).real() == doctest::Approx(2.0 * s.gamma));
  std::complex<double> a = alpha(1.3, s);
  std::complex<double> ref = s.omega0 * s.omega0 - 1.3 * 1.3 - std::complex<double>(0, 1.3) * gamma_tilde(1.3, s);
  CHECK(std::abs(a - ref) < 1e-14);
}

TEST_CASE("tail beyond the cutoff is small and included") {
  ModelSpec s;
  OracleConfig lo;
  lo.omega_max = 20.0;
  MeanForceCM a = stationary_moments(s, lo);
  MeanForceCM b = stationary_moments(s);
  CHECK(a.p2_tail > b.p2_tail);
  CHECK(a.p2 == doctest::Approx(b.p2).epsilon(1e-7));
  CHECK(a.q2 == doctest::Approx(b.q2).epsilon(1e-9));
}

TEST_CASE("oracle config validation") {
  ModelSpec s;
  OracleConfig c;
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(s), std::invalid_argument);
  OracleConfig d;
  d.omega_max = 1.0;  // below the resonance scale
  CHECK_THROWS_AS(d.validate(s), std::invalid_argument);
}
