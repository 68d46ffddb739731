#include "gbattery/model.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gb {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();

void positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("model.") + field + ": must be a positive finite number");
  }
}
}  // namespace

std::string to_string(FrequencyMap f) { return f == FrequencyMap::Tan ? "tan" : "tanh"; }

FrequencyMap frequency_map_from_string(const std::string& s) {
  if (s == "tan") return FrequencyMap::Tan;
  if (s == "tanh") return FrequencyMap::Tanh;
  throw std::invalid_argument("model.frequency_map: expected \"tan\" or \"tanh\", got \"" + s + "\"");
}

double ModelSpec::mass(int k) const {
  if (masses.empty()) return 1.0;
  return masses.at(static_cast<size_t>(k));
}

void ModelSpec::validate() const {
  positive(m0, "m0");
  positive(omega0, "omega0");
  positive(a0, "a0");
  positive(omegaD, "omegaD");
  positive(beta, "beta");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("model.gamma: must be a non-negative finite number");
  }
  if (N < 1) throw std::invalid_argument("model.N: must be >= 1");
  if (!masses.empty()) {
    if (static_cast<int>(masses.size()) != N) {
      throw std::invalid_argument("model.bath_masses: expected " + std::to_string(N) + " entries");
    }
    for (size_t k = 0; k < masses.size(); ++k) {
      if (!(masses[k] > 0.0)) {
        throw std::invalid_argument("model.bath_masses[" + std::to_string(k) + "]: must be > 0");
      }
    }
  }
}

FrequencySample sample_frequencies(const ModelSpec& spec) {
  spec.validate();
  FrequencySample fs;
  fs.omegas.resize(spec.N);
  fs.deltas.resize(spec.N);
  for (int k = 1; k <= spec.N; ++k) {
    double x = 0.5 * kPi * k / (spec.N + 1.0);
    double w = spec.a0 * (spec.frequency_map == FrequencyMap::Tan ? std::tan(x) : std::tanh(x));
    fs.omegas[k - 1] = w;
    fs.deltas[k - 1] = (k == 1) ? w : w - fs.omegas[k - 2];
  }
  return fs;
}

double spectral_density(double omega, const ModelSpec& spec) {
  double r = omega / spec.omegaD;
  return 2.0 * spec.m0 * spec.gamma * omega / (1.0 + r * r);
}

namespace {
// g_k^2 for a given spacing
double coupling_sq(const ModelSpec& spec, int k, double omega, double delta) {
  double r = omega / spec.omegaD;
  return 4.0 * spec.gamma * spec.m0 * spec.mass(k) * omega * omega * delta / (kPi * (1.0 + r * r));
}
}  // namespace

double renormalization_frequency_sq(const ModelSpec& spec, const BathSample& bath) {
  double s = 0.0;
  for (int k = 0; k < spec.N; ++k) {
    double g = bath.couplings[k];
    double w = bath.omegas[k];
    s += g * g / (spec.m0 * spec.mass(k) * w * w);
  }
  return s;
}

BathSample sample_couplings(const ModelSpec& spec, const FrequencySample& freqs) {
  spec.validate();
  BathSample b;
  b.omegas = freqs.omegas;
  b.deltas = freqs.deltas;
  b.couplings.resize(spec.N);
  const int last = spec.N - 1;

  if (spec.tail_match && spec.gamma > 0.0) {
    // each term of omega_R^2 is linear in its spacing; solve for Delta_N
    double rest = 0.0;
    for (int k = 0; k < last; ++k) {
      double w = b.omegas[k];
      rest += coupling_sq(spec, k, w, b.deltas[k]) / (spec.m0 * spec.mass(k) * w * w);
    }
    double w = b.omegas[last];
    double per_unit = coupling_sq(spec, last, w, 1.0) / (spec.m0 * spec.mass(last) * w * w);
    double target = 2.0 * spec.gamma * spec.omegaD;
    double d_new = (target - rest) / per_unit;
    if (!(d_new > 0.0)) {
      throw std::invalid_argument(
          "model.tail_match: the first N-1 modes already exceed the continuum renormalization "
          "frequency; cannot rescale the last spacing");
    }
    b.tail_factor = d_new / b.deltas[last];
    b.deltas[last] = d_new;
    if (b.tail_factor < 0.1 || b.tail_factor > 10.0) {
      std::ostringstream os;
      os << "tail rescale factor " << b.tail_factor << " outside [0.1, 10]";
      b.warnings.push_back(os.str());
    }
  }
  for (int k = 0; k < spec.N; ++k) {
    b.couplings[k] = std::sqrt(coupling_sq(spec, k, b.omegas[k], b.deltas[k]));
  }
  b.omegaR_sq = renormalization_frequency_sq(spec, b);
  return b;
}

BathSample sample_bath(const ModelSpec& spec) {
  return sample_couplings(spec, sample_frequencies(spec));
}

HamiltonianMatrix battery_hamiltonian(const ModelSpec& spec) {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 0.5 * spec.m0 * spec.omega0 * spec.omega0;
  h(1, 1) = 0.5 / spec.m0;
  return HamiltonianMatrix(std::move(h));
}

namespace {
void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
}

Matrix decoupled_matrix(const ModelSpec& spec, const BathSample& bath) {
  const Index n = 2 * (spec.N + 1);
  Matrix h = Matrix::Zero(n, n);
  h(0, 0) = 0.5 * spec.m0 * spec.omega0 * spec.omega0;
  h(1, 1) = 0.5 / spec.m0;
  for (int k = 0; k < spec.N; ++k) {
    double m = spec.mass(k);
    double w = bath.omegas[k];
    h(2 * k + 2, 2 * k + 2) = 0.5 * m * w * w;
    h(2 * k + 3, 2 * k + 3) = 0.5 / m;
  }
  return h;
}

Matrix interaction(const ModelSpec& spec, const BathSample& bath, double lambda, bool linear,
                   bool quadratic) {
  const Index n = 2 * (spec.N + 1);
  Matrix v = Matrix::Zero(n, n);
  if (quadratic) v(0, 0) = 0.5 * spec.m0 * lambda * lambda * bath.omegaR_sq;
  if (linear) {
    for (int k = 0; k < spec.N; ++k) {
      double g = -0.5 * lambda * bath.couplings[k];
      v(0, 2 * k + 2) = g;
      v(2 * k + 2, 0) = g;
    }
  }
  return v;
}
}  // namespace

HamiltonianMatrix interaction_matrix(const ModelSpec& spec, const BathSample& bath,
                                     double lambda) {
  check_lambda(lambda);
  return HamiltonianMatrix(interaction(spec, bath, lambda, true, true));
}

HamiltonianMatrix build_hamiltonian(const ModelSpec& spec, const BathSample& bath,
                                    double lambda) {
  check_lambda(lambda);
  return HamiltonianMatrix(decoupled_matrix(spec, bath) + interaction(spec, bath, lambda, true, true));
}

double protocol_value(const Protocol& p, double t) {
  if (p.exponent < 1) throw std::invalid_argument("protocol.exponent: must be >= 1");
  if (p.t_d < 0.0) throw std::invalid_argument("protocol.t_d: must be >= 0");
  if (p.t_d == 0.0) {
    if (t < 0.0) return 1.0;
    if (t > 0.0) return 0.0;
    throw std::invalid_argument("protocol_value: a quench is undefined exactly at t = 0");
  }
  if (t < 0.0 || t > p.t_d) throw std::invalid_argument("protocol_value: t outside [0, t_d]");
  return std::pow(1.0 - t / p.t_d, p.exponent);
}

double recurrence_estimate(const BathSample& bath) {
  double dmin = std::numeric_limits<double>::infinity();
  for (double d : bath.deltas) dmin = std::min(dmin, d);
  return 2.0 * kPi / dmin;
}

ClModel::ClModel(ModelSpec spec) : spec_(std::move(spec)) {
  bath_ = sample_bath(spec_);
  Matrix h0 = decoupled_matrix(spec_, bath_);
  coupling_ = interaction(spec_, bath_, 1.0, true, false);
  counter_ = interaction(spec_, bath_, 1.0, false, true);
  h0_ = HamiltonianMatrix(h0);
  h1_ = HamiltonianMatrix(h0 + coupling_ + counter_);
  hs_ = battery_hamiltonian(spec_);
}

HamiltonianMatrix ClModel::hamiltonian(double lambda) const {
  check_lambda(lambda);
  return HamiltonianMatrix(h0_.matrix() + lambda * coupling_ + lambda * lambda * counter_);
}

}  // namespace gb
