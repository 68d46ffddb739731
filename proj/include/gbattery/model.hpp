// Discrete Caldeira-Leggett model: bath sample, couplings, Hamiltonian
// matrices and the disconnection protocol lambda(t) = (1 - t/t_d)^p.
#pragma once

#include "gbattery/gqm.hpp"

#include <string>
#include <vector>

namespace gb {

// How bath frequencies are laid out on k = 1..N.
enum class FrequencyMap {
  Tan,   // a0 tan(pi/2 k/(N+1)); band reaches well past the cutoff
  Tanh,  // a0 tanh(pi/2 k/(N+1)); band stays below a0
};

std::string to_string(FrequencyMap f);
FrequencyMap frequency_map_from_string(const std::string& s);

struct ModelSpec {
  double m0 = 1.0;
  double omega0 = 2.0;
  int N = 150;
  double a0 = 1.03;
  std::vector<double> masses;  // empty => all 1
  double gamma = 1.0;
  double omegaD = 4.0;
  double beta = 10.0;
  bool tail_match = true;
  FrequencyMap frequency_map = FrequencyMap::Tan;

  double mass(int k) const;  // k is 0-based bath index
  void validate() const;     // std::invalid_argument with the field name
  bool operator==(const ModelSpec&) const = default;
};

struct BathSample {
  std::vector<double> omegas;
  std::vector<double> deltas;
  std::vector<double> couplings;
  double omegaR_sq = 0.0;
  double tail_factor = 1.0;  // Delta_N rescale applied by the tail match
  std::vector<std::string> warnings;
};

struct Protocol {
  double t_d = 0.0;
  int exponent = 11;
};

struct FrequencySample {
  std::vector<double> omegas;
  std::vector<double> deltas;
};

FrequencySample sample_frequencies(const ModelSpec& spec);

// Couplings g_k from the Lorentz-Drude density; with tail_match the last
// spacing is rescaled so sum g^2/(m0 m_k w^2) hits 2 gamma omegaD.
BathSample sample_couplings(const ModelSpec& spec, const FrequencySample& freqs);

BathSample sample_bath(const ModelSpec& spec);

// sum_k g_k^2 / (m0 m_k w_k^2)
double renormalization_frequency_sq(const ModelSpec& spec, const BathSample& bath);

double spectral_density(double omega, const ModelSpec& spec);

HamiltonianMatrix build_hamiltonian(const ModelSpec& spec, const BathSample& bath,
                                    double lambda);
HamiltonianMatrix interaction_matrix(const ModelSpec& spec, const BathSample& bath,
                                     double lambda);

// Battery block 1/2 diag(m0 w0^2, 1/m0)
HamiltonianMatrix battery_hamiltonian(const ModelSpec& spec);

double protocol_value(const Protocol& p, double t);

// 2 pi / min_k Delta_k
double recurrence_estimate(const BathSample& bath);

// Bundles a spec with its bath sample and the lambda = 0 / 1 matrices.
class ClModel {
 public:
  explicit ClModel(ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  const BathSample& bath() const noexcept { return bath_; }
  int n_bath() const noexcept { return spec_.N; }
  Index dim() const noexcept { return 2 * (spec_.N + 1); }

  const HamiltonianMatrix& h_coupled() const noexcept { return h1_; }   // H_SB
  const HamiltonianMatrix& h_decoupled() const noexcept { return h0_; } // H_S (+) H_B
  const HamiltonianMatrix& h_battery() const noexcept { return hs_; }
  // V at lambda = 1, split into linear (coupling) and quadratic (counter-term) parts
  const Matrix& coupling_part() const noexcept { return coupling_; }
  const Matrix& counter_part() const noexcept { return counter_; }
  Matrix v_full() const { return coupling_ + counter_; }

  HamiltonianMatrix hamiltonian(double lambda) const;

 private:
  ModelSpec spec_;
  BathSample bath_;
  HamiltonianMatrix h0_, h1_, hs_;
  Matrix coupling_, counter_;
};

}  // namespace gb
