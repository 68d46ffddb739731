#include "support.hpp"

#include "gbattery/model.hpp"

#include <doctest.h>

#include <numbers>

using namespace gb;
using namespace gbtest;

TEST_CASE("tail matching puts the renormalization frequency at 2 gamma omegaD") {
  ModelSpec spec;
  BathSample b = sample_bath(spec);
  double sum = 0.0;
  for (int k = 0; k < spec.N; ++k) {
    sum += b.couplings[k] * b.couplings[k] / (spec.m0 * spec.mass(k) * b.omegas[k] * b.omegas[k]);
  }
  CHECK(sum == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(b.omegaR_sq == doctest::Approx(2.0 * spec.gamma * spec.omegaD).epsilon(1e-12));
  CHECK(std::abs(b.omegaR_sq - 8.0) <= 1e-8);
  CHECK(b.tail_factor > 1.0);
}

TEST_CASE("frequency layouts") {
  ModelSpec spec;
  const double pi = std::numbers::pi;
  FrequencySample tan = sample_frequencies(spec);
  for (int k : {1, 75, 150}) {
    CHECK(tan.omegas[k - 1] == doctest::Approx(1.03 * std::tan(0.5 * pi * k / 151.0)).epsilon(1e-13));
  }
  spec.frequency_map = FrequencyMap::Tanh;
  FrequencySample th = sample_frequencies(spec);
  CHECK(th.omegas[0] == doctest::Approx(0.010715).epsilon(1e-4));
  CHECK(th.omegas[149] == doctest::Approx(0.9429).epsilon(1e-4));
  for (int k = 0; k < spec.N; ++k) CHECK(th.omegas[k] < spec.a0);
  CHECK(tan.deltas[0] == doctest::Approx(tan.omegas[0]));
  CHECK(tan.deltas[10] == doctest::Approx(tan.omegas[10] - tan.omegas[9]));
  CHECK(frequency_map_from_string("tanh") == FrequencyMap::Tanh);
  CHECK_THROWS(frequency_map_from_string("sin"));
}

TEST_CASE("one bath mode: hamiltonian matrix term by term") {
  ModelSpec spec;
  spec.N = 1;
  spec.tail_match = false;
  spec.masses = {1.5};
  ClModel model(spec);
  const BathSample& b = model.bath();
  const double lam = 0.37, g = b.couplings[0], w = b.omegas[0], m1 = 1.5;
  // H_op = P0^2/2 + w0^2 Q0^2/2 + P1^2/(2 m1) + m1 w^2 Q1^2/2 - lam g Q0 Q1
  //        + lam^2 g^2/(2 m1 w^2) Q0^2
  Matrix ref = Matrix::Zero(4, 4);
  ref(0, 0) = 0.5 * 4.0 + 0.5 * lam * lam * g * g / (m1 * w * w);
  ref(1, 1) = 0.5;
  ref(2, 2) = 0.5 * m1 * w * w;
  ref(3, 3) = 0.5 / m1;
  ref(0, 2) = ref(2, 0) = -0.5 * lam * g;
  Matrix h = model.hamiltonian(lam).matrix();
  CHECK((h - ref).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((model.h_coupled().matrix() - model.hamiltonian(1.0).matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((model.h_decoupled().matrix() - model.hamiltonian(0.0).matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((model.v_full() - (model.h_coupled().matrix() - model.h_decoupled().matrix())).cwiseAbs().maxCoeff() <
        1e-15);
}

TEST_CASE("couplings follow the sampled spectral density") {
  ModelSpec spec;
  spec.N = 40;
  spec.tail_match = false;
  BathSample b = sample_bath(spec);
  const double pi = std::numbers::pi;
  for (int k = 0; k < spec.N; ++k) {
    const double w = b.omegas[k];
    const double r = w / spec.omegaD;
    const double g2 = 4.0 * spec.gamma * spec.m0 * spec.mass(k) * w * w * b.deltas[k] / (pi * (1.0 + r * r));
    CHECK(b.couplings[k] * b.couplings[k] == doctest::Approx(g2).epsilon(1e-12));
    CHECK(spectral_density(w, spec) == doctest::Approx(2.0 * spec.m0 * spec.gamma * w / (1.0 + r * r)).epsilon(1e-14));
  }
  CHECK(b.tail_factor == 1.0);
}

TEST_CASE("protocol shape") {
  Protocol p{2.0, 11};
  CHECK(protocol_value(p, 0.0) == 1.0);
  CHECK(protocol_value(p, 2.0) == 0.0);
  CHECK(protocol_value(p, 1.0) == doctest::Approx(std::pow(0.5, 11)));
  CHECK_THROWS(protocol_value(p, 2.5));
  Protocol q{0.0, 11};
  CHECK(protocol_value(q, 0.1) == 0.0);
  CHECK(protocol_value(q, -0.1) == 1.0);
}

TEST_CASE("spec validation names the field") {
  ModelSpec s;
  s.beta = 0.0;
  try {
    s.validate();
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("model.beta") != std::string::npos);
  }
  ModelSpec t;
  t.masses = {1.0, 2.0};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  ModelSpec u;
  u.N = 0;
  CHECK_THROWS_AS(u.validate(), std::invalid_argument);
}

TEST_CASE("recurrence estimate at the default bath") {
  BathSample b = sample_bath(ModelSpec{});
  CHECK(recurrence_estimate(b) == doctest::Approx(2.0 * std::numbers::pi / b.deltas[0]));
  CHECK(recurrence_estimate(b) == doctest::Approx(590.0).epsilon(0.02));
}

TEST_CASE("decoupled limit and a three-mode toy") {
  ModelSpec z;
  z.gamma = 0.0;
  z.N = 5;
  BathSample b = sample_bath(z);
  for (double g : b.couplings) CHECK(g == 0.0);
  CHECK(b.omegaR_sq == 0.0);

  ModelSpec t;
  t.N = 3;
  t.masses = {1.0, 2.0, 0.5};
  t.tail_match = false;
  BathSample c = sample_bath(t);
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) sum += c.couplings[k] * c.couplings[k] / (t.m0 * t.masses[k] * c.omegas[k] * c.omegas[k]);
  CHECK(c.omegaR_sq == doctest::Approx(sum).epsilon(1e-12));
}
