#include "gbattery/extraction.hpp"

#include "gbattery/evolution.hpp"

#include <cmath>

namespace gb {

namespace {

void require_single_mode(const CovarianceMatrix& s, const HamiltonianMatrix& h) {
  if (s.dim() != 2 || h.dim() != 2) {
    throw std::invalid_argument("extraction: battery must be a single mode (2x2 matrices)");
  }
}

const Matrix& omega1() {
  static const Matrix om = symplectic_form(1);
  return om;
}

}  // namespace

double ergotropy(const CovarianceMatrix& sigma_S, const HamiltonianMatrix& h_S) {
  require_single_mode(sigma_S, h_S);
  double s = symplectic_eigenvalues(sigma_S.matrix())(0);
  if (s < 1.0 - 1e-9) throw std::invalid_argument("ergotropy: unphysical battery state (nu < 1)");
  double h = symplectic_eigenvalues(h_S.matrix())(0);
  double w = mean_energy(h_S, sigma_S) - s * h;
  if (w < -1e-10 * std::max(1.0, s * h)) {
    throw NumericalError("ergotropy: negative value " + std::to_string(w));
  }
  return std::max(w, 0.0);
}

SymplecticTransform extraction_transform(const CovarianceMatrix& sigma_S,
                                         const HamiltonianMatrix& h_S) {
  require_single_mode(sigma_S, h_S);
  const Matrix& om = omega1();
  Matrix sh = williamson_decompose(h_S.matrix()).transform.matrix();
  Matrix ss = williamson_decompose(sigma_S.matrix()).transform.matrix();
  return SymplecticTransform(-om * sh * ss.transpose() * om);
}

ExtractionResult extract(const CovarianceMatrix& sigma_S, const HamiltonianMatrix& h_S) {
  require_single_mode(sigma_S, h_S);
  ExtractionResult r;
  r.s = symplectic_eigenvalues(sigma_S.matrix())(0);
  r.h = symplectic_eigenvalues(h_S.matrix())(0);
  r.ergotropy = ergotropy(sigma_S, h_S);
  r.transform = extraction_transform(sigma_S, h_S);
  r.passive_cm = evolve(sigma_S, r.transform);
  return r;
}

SymplecticTransform theta_rotation(double theta) {
  Matrix r(2, 2);
  double c = std::cos(0.5 * theta);
  double s = std::sin(0.5 * theta);
  r << c, -s, s, c;
  return SymplecticTransform(std::move(r));
}

SymplecticTransform theta_extraction_transform(const CovarianceMatrix& sigma_S,
                                               const HamiltonianMatrix& h_S, double theta) {
  require_single_mode(sigma_S, h_S);
  // normal coordinates x = S_H^T r make H_S = h I; rotate there
  Matrix sh = williamson_decompose(h_S.matrix()).transform.matrix();
  Matrix to_normal = sh.transpose();
  Matrix from_normal = symplectic_inverse(to_normal);
  Matrix l = from_normal * theta_rotation(theta).matrix() * to_normal *
             extraction_transform(sigma_S, h_S).matrix();
  return SymplecticTransform(std::move(l));
}

CovarianceMatrix apply_local_battery(const CovarianceMatrix& s_full,
                                     const SymplecticTransform& S_local) {
  if (S_local.dim() != 2) throw std::invalid_argument("apply_local_battery: local transform must be 2x2");
  if (s_full.dim() < 2) throw std::invalid_argument("apply_local_battery: dimension mismatch");
  Matrix out = s_full.matrix();
  const Matrix& l = S_local.matrix();
  Matrix top = l * out.topRows(2);
  out.topRows(2) = top;
  Matrix left = out.leftCols(2) * l.transpose();
  out.leftCols(2) = left;
  return CovarianceMatrix::symmetrized(out);
}

}  // namespace gb
