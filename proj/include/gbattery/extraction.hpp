// Single-mode Gaussian ergotropy, the extracting symplectic map and the
// theta family of extractors.
#pragma once

#include "gbattery/gqm.hpp"

namespace gb {

struct ExtractionResult {
  double ergotropy = 0.0;
  SymplecticTransform transform;  // S_W, 2x2
  CovarianceMatrix passive_cm;    // S_W sigma_S S_W^T
  double s = 0.0;                 // symplectic eigenvalue of sigma_S
  double h = 0.0;                 // symplectic eigenvalue of H_S
};

// 1/2 tr[H_S sigma_S] - s h, clamped at 0
double ergotropy(const CovarianceMatrix& sigma_S, const HamiltonianMatrix& h_S);

// S_W = -Omega S_H S_sigma^T Omega
SymplecticTransform extraction_transform(const CovarianceMatrix& sigma_S,
                                         const HamiltonianMatrix& h_S);

ExtractionResult extract(const CovarianceMatrix& sigma_S, const HamiltonianMatrix& h_S);

// [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
SymplecticTransform theta_rotation(double theta);

// S_W followed by the theta rotation taken in the normal-coordinate basis of
// H_S, where it commutes with the battery Hamiltonian.
SymplecticTransform theta_extraction_transform(const CovarianceMatrix& sigma_S,
                                               const HamiltonianMatrix& h_S, double theta);

// (S_local (+) I) s (S_local (+) I)^T, battery is mode 0
CovarianceMatrix apply_local_battery(const CovarianceMatrix& s_full,
                                     const SymplecticTransform& S_local);

}  // namespace gb
