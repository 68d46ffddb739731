#include "gbattery/gqm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

namespace gb {

namespace {

void require_square_even(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw std::invalid_argument(std::string(what) + ": expected a non-empty 2M x 2M matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

double asymmetry(const Matrix& m) {
  double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

void require_symmetric(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
  if (asymmetry(m) > 1e-12) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
}

Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Omega * X for block-diagonal Omega: rows (2j, 2j+1) -> (x_{2j+1}, -x_{2j})
Matrix omega_left(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Index j = 0; j < x.rows(); j += 2) {
    y.row(j) = x.row(j + 1);
    y.row(j + 1) = -x.row(j);
  }
  return y;
}

Matrix omega_right(const Matrix& x) {
  // X * Omega: columns (2j, 2j+1) -> (-x_{2j+1}, x_{2j})
  Matrix y(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); j += 2) {
    y.col(j) = -x.col(j + 1);
    y.col(j + 1) = x.col(j);
  }
  return y;
}

}  // namespace

CovarianceMatrix::CovarianceMatrix(Matrix m) : m_(std::move(m)) {
  require_square_even(m_, "CovarianceMatrix");
  require_symmetric(m_, "CovarianceMatrix");
}

CovarianceMatrix CovarianceMatrix::symmetrized(const Matrix& m) {
  require_square_even(m, "CovarianceMatrix");
  return CovarianceMatrix(symmetric_part(m));
}

HamiltonianMatrix::HamiltonianMatrix(Matrix m) : m_(std::move(m)) {
  require_square_even(m_, "HamiltonianMatrix");
  require_symmetric(m_, "HamiltonianMatrix");
}

HamiltonianMatrix HamiltonianMatrix::symmetrized(const Matrix& m) {
  require_square_even(m, "HamiltonianMatrix");
  return HamiltonianMatrix(symmetric_part(m));
}

SymplecticTransform::SymplecticTransform(Matrix m, double tol) : m_(std::move(m)) {
  require_square_even(m_, "SymplecticTransform");
  if (!m_.allFinite()) throw NumericalError("SymplecticTransform: non-finite entries");
  defect_ = symplectic_defect(m_);
  if (!(defect_ <= tol)) {
    throw NumericalError("SymplecticTransform: symplecticity defect " + std::to_string(defect_) +
                         " exceeds tolerance " + std::to_string(tol));
  }
}

SymplecticTransform SymplecticTransform::identity(Index n_modes) {
  return SymplecticTransform(Matrix::Identity(2 * n_modes, 2 * n_modes));
}

SymplecticTransform SymplecticTransform::inverse() const {
  return SymplecticTransform(symplectic_inverse(m_), std::max(kDefaultTol, 10 * defect_));
}

SymplecticTransform SymplecticTransform::operator*(const SymplecticTransform& o) const {
  if (o.dim() != dim()) throw std::invalid_argument("SymplecticTransform: dimension mismatch");
  return SymplecticTransform(m_ * o.m_, std::max(kDefaultTol, 2 * (defect_ + o.defect_)));
}

Matrix symplectic_form(Index n_modes) {
  if (n_modes < 1) throw std::invalid_argument("symplectic_form: n_modes must be >= 1");
  Matrix om = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (Index j = 0; j < n_modes; ++j) {
    om(2 * j, 2 * j + 1) = 1.0;
    om(2 * j + 1, 2 * j) = -1.0;
  }
  return om;
}

double symplectic_defect(const Matrix& s) {
  // S Omega S^T = sum_j (s_{2j} s_{2j+1}^T - s_{2j+1} s_{2j}^T) over column pairs
  Matrix so = omega_right(s);
  Matrix d = so * s.transpose();
  for (Index j = 0; j < d.rows(); j += 2) {
    d(j, j + 1) -= 1.0;
    d(j + 1, j) += 1.0;
  }
  return d.cwiseAbs().maxCoeff();
}

Matrix symplectic_inverse(const Matrix& s) {
  return -omega_left(omega_right(s.transpose()));
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(m), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("min_eigenvalue: eigensolver failed");
  return es.eigenvalues()(0);
}

Vector symplectic_eigenvalues(const Matrix& m) {
  require_square_even(m, "symplectic_eigenvalues");
  require_symmetric(m, "symplectic_eigenvalues");
  const Index n = m.rows();
  Matrix ms = symmetric_part(m);
  // i Omega m is similar to i L^T Omega L (Cholesky) or i R Omega R (sqrt);
  // both are Hermitian so the spectrum comes out real and well conditioned.
  Matrix k;
  Eigen::LLT<Matrix> llt(ms);
  if (llt.info() == Eigen::Success) {
    Matrix l = llt.matrixL();
    k = l.transpose() * omega_left(l);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(ms);
    if (es.info() != Eigen::Success) throw NumericalError("symplectic_eigenvalues: eigensolver failed");
    double tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues()(0) < -tol) {
      throw std::invalid_argument("symplectic_eigenvalues: matrix is not positive semidefinite");
    }
    Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix r = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    k = r * omega_left(r);
  }
  k = 0.5 * (k - k.transpose());
  Eigen::MatrixXcd herm = std::complex<double>(0.0, 1.0) * k.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symplectic_eigenvalues: eigensolver failed");
  // eigenvalues come in +-nu pairs, ascending; the top half are the positive ones
  const Vector& ev = es.eigenvalues();
  Vector nu(n / 2);
  for (Index j = 0; j < n / 2; ++j) {
    nu(j) = 0.5 * (ev(n / 2 + j) - ev(n / 2 - 1 - j));
  }
  std::sort(nu.data(), nu.data() + nu.size());
  return nu;
}

WilliamsonResult williamson_decompose(const Matrix& m) {
  require_square_even(m, "williamson_decompose");
  require_symmetric(m, "williamson_decompose");
  const Index n = m.rows();
  const Index modes = n / 2;
  Matrix ms = symmetric_part(m);
  Eigen::LLT<Matrix> llt(ms);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("williamson_decompose: matrix is not positive definite");
  }
  Matrix l = llt.matrixL();

  // A = L^{-1} Omega L^{-T}, antisymmetric with spectrum +-i/nu_j
  Matrix x = l.triangularView<Eigen::Lower>().solve(omega_left(Matrix::Identity(n, n)));
  Matrix a = l.triangularView<Eigen::Lower>().solve(x.transpose()).transpose();
  a = 0.5 * (a - a.transpose());

  Eigen::RealSchur<Matrix> schur(a);
  if (schur.info() != Eigen::Success) throw NumericalError("williamson_decompose: Schur form failed");
  Matrix t = schur.matrixT();
  Matrix o = schur.matrixU();

  std::vector<std::pair<double, Index>> blocks;  // (nu, first column)
  blocks.reserve(modes);
  Index i = 0;
  while (i < n) {
    if (i + 1 >= n || t(i + 1, i) == 0.0) {
      throw NumericalError("williamson_decompose: real eigenvalue in antisymmetric Schur form");
    }
    double b = t(i, i + 1);
    double c = t(i + 1, i);
    double amp = std::sqrt(std::max(-b * c, 0.0));
    if (!(amp > 0.0)) throw NumericalError("williamson_decompose: degenerate Schur block");
    if (b < 0.0) o.col(i + 1) = -o.col(i + 1);
    blocks.emplace_back(1.0 / amp, i);
    i += 2;
  }
  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const auto& p, const auto& q) { return p.first < q.first; });

  // S = L O D^{-1/2}: then S D S^T = L L^T and S Omega S^T = L O T O^T L^T = Omega
  Matrix s(n, n);
  Vector nu(modes);
  for (Index j = 0; j < modes; ++j) {
    double v = blocks[j].first;
    Index col = blocks[j].second;
    nu(j) = v;
    double scale = 1.0 / std::sqrt(v);
    s.col(2 * j) = l * o.col(col) * scale;
    s.col(2 * j + 1) = l * o.col(col + 1) * scale;
  }
  SymplecticTransform st(std::move(s));
  return WilliamsonResult{std::move(st), std::move(nu)};
}

Vector normal_mode_frequencies(const HamiltonianMatrix& h) {
  return 2.0 * symplectic_eigenvalues(h.matrix());
}

double thermal_symplectic_eigenvalue(double omega, double beta) {
  double x = beta * omega;
  if (!(x > 0.0)) throw std::invalid_argument("thermal state needs beta * omega > 0");
  // coth(x/2) = 1 + 2 / expm1(x)
  return 1.0 + 2.0 / std::expm1(x);
}

CovarianceMatrix thermal_cm(const HamiltonianMatrix& h, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("thermal_cm: beta must be > 0");
  WilliamsonResult w;
  try {
    w = williamson_decompose(h.matrix());
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("thermal_cm: Hamiltonian has a zero-frequency normal mode");
  }
  // h = S_h D S_h^T  =>  sigma = S_h^{-T} diag(nu_th) S_h^{-1}
  const Matrix& sh = w.transform.matrix();
  Matrix tinv = symplectic_inverse(sh).transpose();
  const Index modes = h.n_modes();
  Vector d(2 * modes);
  for (Index j = 0; j < modes; ++j) {
    double omega = 2.0 * w.symplectic_eigenvalues(j);
    if (!(omega > 0.0)) {
      throw std::invalid_argument("thermal_cm: Hamiltonian has a zero-frequency normal mode");
    }
    double v = thermal_symplectic_eigenvalue(omega, beta);
    d(2 * j) = v;
    d(2 * j + 1) = v;
  }
  return CovarianceMatrix::symmetrized(tinv * d.asDiagonal() * tinv.transpose());
}

double mean_energy(const Matrix& h, const Matrix& s) {
  if (h.rows() != s.rows() || h.cols() != s.cols()) {
    throw std::invalid_argument("mean_energy: dimension mismatch");
  }
  return 0.5 * h.cwiseProduct(s).sum();
}

double mean_energy(const HamiltonianMatrix& h, const CovarianceMatrix& s) {
  return mean_energy(h.matrix(), s.matrix());
}

Matrix sub_block(const Matrix& m, std::span<const Index> modes) {
  const Index n = static_cast<Index>(modes.size());
  Matrix out(2 * n, 2 * n);
  for (Index a = 0; a < n; ++a) {
    Index ma = modes[a];
    if (ma < 0 || 2 * ma + 1 >= m.rows()) throw std::out_of_range("sub_block: mode index out of range");
    for (Index b = 0; b < n; ++b) {
      Index mb = modes[b];
      if (mb < 0 || 2 * mb + 1 >= m.rows()) throw std::out_of_range("sub_block: mode index out of range");
      out.block<2, 2>(2 * a, 2 * b) = m.block<2, 2>(2 * ma, 2 * mb);
    }
  }
  return out;
}

CovarianceMatrix sub_block(const CovarianceMatrix& s, std::span<const Index> modes) {
  return CovarianceMatrix(sub_block(s.matrix(), modes));
}

double entropy_term(double nu) {
  if (nu < 1.0 - 1e-9) {
    throw std::invalid_argument("entropy: symplectic eigenvalue below 1 (unphysical state)");
  }
  if (nu <= 1.0 + 1e-12) return 0.0;
  double p = 0.5 * (nu + 1.0);
  double q = 0.5 * (nu - 1.0);
  return p * std::log(p) - q * std::log(q);
}

double von_neumann_entropy_from_spectrum(const Vector& nus) {
  double s = 0.0;
  for (Index i = 0; i < nus.size(); ++i) s += entropy_term(nus(i));
  return s;
}

double von_neumann_entropy(const CovarianceMatrix& s) {
  return von_neumann_entropy_from_spectrum(symplectic_eigenvalues(s.matrix()));
}

double mutual_information(const CovarianceMatrix& s, std::span<const Index> a,
                          std::span<const Index> b) {
  std::vector<Index> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::vector<Index> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("mutual_information: partitions overlap");
  }
  if (static_cast<Index>(sorted.size()) != s.n_modes()) {
    throw std::invalid_argument("mutual_information: partitions must cover all modes");
  }
  double sa = von_neumann_entropy(sub_block(s, a));
  double sb = von_neumann_entropy(sub_block(s, b));
  double sab = von_neumann_entropy(s);
  double mi = sa + sb - sab;
  if (mi < -1e-9) throw NumericalError("mutual_information: negative value " + std::to_string(mi));
  return std::max(mi, 0.0);
}

double log_2sinh(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("log_2sinh: argument must be > 0");
  // 2 sinh x = e^x (1 - e^{-2x})
  return x + std::log1p(-std::exp(-2.0 * x));
}

ThermalReference::ThermalReference(HamiltonianMatrix h, double beta)
    : h_(std::move(h)), beta_(beta) {
  if (!(beta_ > 0.0)) throw std::invalid_argument("ThermalReference: beta must be > 0");
  omegas_ = normal_mode_frequencies(h_);
  log_z_ = 0.0;
  for (Index j = 0; j < omegas_.size(); ++j) {
    if (!(omegas_(j) > 0.0)) {
      throw std::invalid_argument("ThermalReference: zero-frequency normal mode");
    }
    log_z_ -= log_2sinh(0.5 * beta_ * omegas_(j));
  }
}

double ThermalReference::relative_entropy(const CovarianceMatrix& s) const {
  // D(rho||tau) = -S(rho) - tr[rho ln tau] = beta <H> + ln Z - S(rho)
  double d = beta_ * mean_energy(h_, s) + log_z_ - von_neumann_entropy(s);
  if (d < -1e-7) throw NumericalError("relative_entropy: negative value " + std::to_string(d));
  return std::max(d, 0.0);
}

double relative_entropy_to_thermal(const CovarianceMatrix& s, const HamiltonianMatrix& h,
                                   double beta) {
  return ThermalReference(h, beta).relative_entropy(s);
}

std::vector<Index> mode_range(Index first, Index count) {
  std::vector<Index> v(count);
  std::iota(v.begin(), v.end(), first);
  return v;
}

}  // namespace gb
