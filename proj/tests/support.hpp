// Shared helpers for the unit tests: reference computations that avoid the
// library's own algorithms.
#pragma once

#include "gbattery/gqm.hpp"
#include "gbattery/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace gbtest {

using gb::Index;
using gb::Matrix;
using gb::Vector;
using CMatrix = Eigen::MatrixXcd;

inline Matrix omega(Index n_modes) {
  Matrix o = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (Index j = 0; j < n_modes; ++j) {
    o(2 * j, 2 * j + 1) = 1.0;
    o(2 * j + 1, 2 * j) = -1.0;
  }
  return o;
}

// deterministic pseudo-random symmetric positive definite matrix
inline Matrix random_spd(Index n, unsigned seed, double shift = 0.5) {
  Matrix a(n, n);
  unsigned s = seed;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      s = s * 1664525u + 1013904223u;
      a(i, j) = (static_cast<double>(s >> 8) / 16777216.0) - 0.5;
    }
  }
  return a * a.transpose() + shift * Matrix::Identity(n, n);
}

// moduli of the eigenvalues of i Omega m, general complex solver, paired
inline std::vector<double> brute_symplectic_eigenvalues(const Matrix& m) {
  const Index n = m.rows();
  CMatrix x = std::complex<double>(0.0, 1.0) * (omega(n / 2) * m).cast<std::complex<double>>();
  Eigen::ComplexEigenSolver<CMatrix> es(x);
  std::vector<double> v;
  for (Index i = 0; i < n; ++i) v.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (Index i = 0; i < n; i += 2) out.push_back(0.5 * (v[i] + v[i + 1]));
  return out;
}

// analytic function of a diagonalizable complex matrix
template <class F>
CMatrix matrix_function(const CMatrix& x, F f) {
  Eigen::ComplexEigenSolver<CMatrix> es(x);
  CMatrix d = es.eigenvalues().unaryExpr(f).asDiagonal();
  return es.eigenvectors() * d * es.eigenvectors().inverse();
}

inline double entropy_nu(double nu) {
  if (nu <= 1.0 + 1e-15) return 0.0;
  double a = 0.5 * (nu + 1.0), b = 0.5 * (nu - 1.0);
  return a * std::log(a) - b * std::log(b);
}

inline double half_trace(const Matrix& h, const Matrix& s) { return 0.5 * (h * s).trace(); }

// small bath used by the cycle-level tests
inline gb::ModelSpec small_spec(int n = 24) {
  gb::ModelSpec s;
  s.N = n;
  return s;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace gbtest
