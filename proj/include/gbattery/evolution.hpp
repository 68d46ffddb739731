// Symplectic propagators: exact exponentials for constant Hamiltonians and
// the stepped time-ordered product for the disconnection protocol.
#pragma once

#include "gbattery/gqm.hpp"
#include "gbattery/model.hpp"

#include <Eigen/SparseCore>

#include <optional>
#include <span>

namespace gb {

struct StepperConfig {
  double dt = 0.0;  // <= 0 means min(1e-3, t_d / 1e4)
  bool refine = false;
  double sympl_tol = 1e-8;
  double work_tol = 1e-4;
  int max_halvings = 12;

  void validate() const;
  bool operator==(const StepperConfig&) const = default;
};

double default_step(double t_d);

// Diagonal symplectic scaling r' = D r that equalizes the Q and P diagonal
// entries of h mode by mode; keeps the generator's norm near the largest
// frequency instead of its square.
Vector balancing_scale(const Matrix& h);

// exp(2 Omega H t)
SymplecticTransform propagator_const(const HamiltonianMatrix& h, double t,
                                     double sympl_tol = SymplecticTransform::kDefaultTol);

// Generator 2 Omega (H0 + lambda C + lambda^2 R) in balanced coordinates,
// advanced step by step on a dense row-major matrix.
class ProtocolStepper {
 public:
  ProtocolStepper(const Matrix& h0, const Matrix& c, const Matrix& r);

  Index dim() const noexcept { return n_; }
  // X <- exp(A(lambda) dt) X, where X lives in balanced coordinates
  void step(double lambda, double dt);
  // S = prod_{i<m} exp(A(lambda_i) dt) with lambda_i = f(i dt); returns S in
  // physical coordinates
  template <class LambdaFn>
  Matrix run(LambdaFn&& lambda_at, long m, double dt) {
    reset();
    for (long i = 0; i < m; ++i) step(lambda_at(static_cast<double>(i) * dt), dt);
    return physical();
  }
  void reset();
  Matrix physical() const;
  long terms_used() const noexcept { return terms_; }

 private:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Index n_;
  Vector scale_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_;
  std::vector<double> v0_, v1_, v2_;
  RowMatrix x_, term_, next_;
  long terms_ = 0;
};

struct ProtocolPropagation {
  SymplecticTransform transform;
  double dt = 0.0;
  long steps = 0;
  int halvings = 0;
  double last_relative_change = 0.0;  // of W_d between the final two refinements
};

// Optional thermal state lets refinement judge convergence by W_d without
// rebuilding it.
ProtocolPropagation propagate_protocol(const ClModel& model, const Protocol& protocol,
                                       const StepperConfig& cfg,
                                       const CovarianceMatrix* thermal = nullptr);

SymplecticTransform propagator_protocol(const ClModel& model, const Protocol& protocol,
                                        const StepperConfig& cfg);

CovarianceMatrix evolve(const CovarianceMatrix& s, const SymplecticTransform& S);
CovarianceMatrix evolve(const CovarianceMatrix& s, const Matrix& S);

// Direct sum of exp(2 Omega H_active t) on active_modes and exp(2 Omega H_free t)
// on free_modes.
SymplecticTransform free_bath_propagator(const HamiltonianMatrix& h_active,
                                         std::span<const Index> active_modes,
                                         const HamiltonianMatrix& h_free,
                                         std::span<const Index> free_modes, double t);

CovarianceMatrix evolve_with_free_bath(const CovarianceMatrix& s, const HamiltonianMatrix& h_active,
                                       std::span<const Index> active_modes,
                                       const HamiltonianMatrix& h_free,
                                       std::span<const Index> free_modes, double t);

}  // namespace gb
