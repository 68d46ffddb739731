// Gaussian covariance-matrix algebra: symplectic form, Williamson form,
// thermal states, energies and entropies.
//
// Mode ordering is (Q0, P0, Q1, P1, ...). Hamiltonian matrices carry the 1/2,
// i.e. H_op = r^T H r, so normal-mode frequencies are 2x the symplectic
// eigenvalues of H.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <vector>

namespace gb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Numerical routine failed (non-convergence, lost structure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 2M x 2M symmetric matrix of anticommutator moments <{r, r^T}>.
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;
  // Throws std::invalid_argument unless square, even sized and symmetric
  // to 1e-12 relative.
  explicit CovarianceMatrix(Matrix m);
  // Symmetrizes (X + X^T)/2 first; for results of congruences.
  static CovarianceMatrix symmetrized(const Matrix& m);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  Index n_modes() const noexcept { return m_.rows() / 2; }

 private:
  Matrix m_;
};

// Symmetric matrix H with H_op = r^T H r.
class HamiltonianMatrix {
 public:
  HamiltonianMatrix() = default;
  explicit HamiltonianMatrix(Matrix m);
  static HamiltonianMatrix symmetrized(const Matrix& m);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  Index n_modes() const noexcept { return m_.rows() / 2; }

 private:
  Matrix m_;
};

// S with S Omega S^T = Omega, checked on construction.
class SymplecticTransform {
 public:
  static constexpr double kDefaultTol = 1e-8;

  SymplecticTransform() = default;
  explicit SymplecticTransform(Matrix m, double tol = kDefaultTol);
  static SymplecticTransform identity(Index n_modes);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  Index n_modes() const noexcept { return m_.rows() / 2; }
  // max |S Omega S^T - Omega|, cached at construction
  double defect() const noexcept { return defect_; }

  SymplecticTransform inverse() const;
  SymplecticTransform operator*(const SymplecticTransform& o) const;

 private:
  Matrix m_;
  double defect_ = 0.0;
};

struct WilliamsonResult {
  SymplecticTransform transform;  // m = S (+) nu_j I2 S^T
  Vector symplectic_eigenvalues;  // ascending
};

Matrix symplectic_form(Index n_modes);

// max-norm of S Omega S^T - Omega; exploits the block structure of Omega
double symplectic_defect(const Matrix& s);

// Inverse of a symplectic matrix, -Omega S^T Omega, without a solve.
Matrix symplectic_inverse(const Matrix& s);

// Positive eigenvalues of i Omega m, ascending. m must be symmetric PSD.
Vector symplectic_eigenvalues(const Matrix& m);
inline Vector symplectic_eigenvalues(const CovarianceMatrix& s) {
  return symplectic_eigenvalues(s.matrix());
}
inline Vector symplectic_eigenvalues(const HamiltonianMatrix& h) {
  return symplectic_eigenvalues(h.matrix());
}

// m = S diag(nu_1, nu_1, nu_2, nu_2, ...) S^T for symmetric positive-definite m.
WilliamsonResult williamson_decompose(const Matrix& m);

// Normal-mode frequencies 2 * symplectic eigenvalues of h, ascending.
Vector normal_mode_frequencies(const HamiltonianMatrix& h);

// coth(beta w / 2), stable for small and large arguments
double thermal_symplectic_eigenvalue(double omega, double beta);

CovarianceMatrix thermal_cm(const HamiltonianMatrix& h, double beta);

double mean_energy(const HamiltonianMatrix& h, const CovarianceMatrix& s);
double mean_energy(const Matrix& h, const Matrix& s);

// Principal sub-block for the given modes, in the given order.
CovarianceMatrix sub_block(const CovarianceMatrix& s, std::span<const Index> modes);
Matrix sub_block(const Matrix& m, std::span<const Index> modes);

// g(nu) = ((nu+1)/2) ln((nu+1)/2) - ((nu-1)/2) ln((nu-1)/2), 0 near nu = 1.
double entropy_term(double nu);
double von_neumann_entropy(const CovarianceMatrix& s);
double von_neumann_entropy_from_spectrum(const Vector& nus);

double mutual_information(const CovarianceMatrix& s, std::span<const Index> a,
                          std::span<const Index> b);

// ln(2 sinh(x)) for x > 0 without overflow
double log_2sinh(double x);

// Cached normal modes of h for repeated relative-entropy evaluations.
class ThermalReference {
 public:
  ThermalReference(HamiltonianMatrix h, double beta);

  const HamiltonianMatrix& hamiltonian() const noexcept { return h_; }
  double beta() const noexcept { return beta_; }
  const Vector& frequencies() const noexcept { return omegas_; }
  // ln Z = -sum_j ln(2 sinh(beta w_j / 2))
  double log_partition() const noexcept { return log_z_; }

  // D(rho || tau_h) = beta <H> + sum ln(2 sinh(beta w/2)) ... see .cpp
  double relative_entropy(const CovarianceMatrix& s) const;

 private:
  HamiltonianMatrix h_;
  double beta_;
  Vector omegas_;
  double log_z_;
};

double relative_entropy_to_thermal(const CovarianceMatrix& s, const HamiltonianMatrix& h,
                                   double beta);

// Smallest eigenvalue of the symmetric part.
double min_eigenvalue(const Matrix& m);

// Index list 0..n-1 offset by `first`
std::vector<Index> mode_range(Index first, Index count);

}  // namespace gb
