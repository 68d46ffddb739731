#include "gbattery/evolution.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace gb {

void StepperConfig::validate() const {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("stepper.dt: must be >= 0 (0 = automatic)");
  if (!(sympl_tol > 0.0)) throw std::invalid_argument("stepper.sympl_tol: must be > 0");
  if (!(work_tol > 0.0)) throw std::invalid_argument("stepper.work_tol: must be > 0");
  if (max_halvings < 0) throw std::invalid_argument("stepper.max_halvings: must be >= 0");
}

double default_step(double t_d) { return std::min(1e-3, t_d / 1e4); }

Vector balancing_scale(const Matrix& h) {
  const Index modes = h.rows() / 2;
  Vector d(2 * modes);
  for (Index j = 0; j < modes; ++j) {
    double hq = h(2 * j, 2 * j);
    double hp = h(2 * j + 1, 2 * j + 1);
    double s = (hq > 0.0 && hp > 0.0) ? std::pow(hq / hp, 0.25) : 1.0;
    d(2 * j) = s;
    d(2 * j + 1) = 1.0 / s;
  }
  return d;
}

namespace {

// 2 Omega H
Matrix generator(const Matrix& h) {
  Matrix a(h.rows(), h.cols());
  for (Index j = 0; j < h.rows(); j += 2) {
    a.row(j) = 2.0 * h.row(j + 1);
    a.row(j + 1) = -2.0 * h.row(j);
  }
  return a;
}

// D A D^{-1}
Matrix balance(const Matrix& a, const Vector& d) {
  return d.asDiagonal() * a * d.cwiseInverse().asDiagonal();
}

Matrix unbalance(const Matrix& x, const Vector& d) {
  return d.cwiseInverse().asDiagonal() * x * d.asDiagonal();
}

}  // namespace

SymplecticTransform propagator_const(const HamiltonianMatrix& h, double t, double sympl_tol) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("propagator_const: t must be >= 0");
  const Index n = h.dim();
  if (t == 0.0) return SymplecticTransform::identity(h.n_modes());
  Vector d = balancing_scale(h.matrix());
  Matrix a = balance(generator(h.matrix()), d) * t;
  Matrix e = a.exp();
  (void)n;
  return SymplecticTransform(unbalance(e, d), sympl_tol);
}

ProtocolStepper::ProtocolStepper(const Matrix& h0, const Matrix& c, const Matrix& r)
    : n_(h0.rows()) {
  if (c.rows() != n_ || r.rows() != n_) throw std::invalid_argument("ProtocolStepper: dimension mismatch");
  scale_ = balancing_scale(h0);
  Matrix a0 = balance(generator(h0), scale_);
  Matrix a1 = balance(generator(c), scale_);
  Matrix a2 = balance(generator(r), scale_);

  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < n_; ++j) {
      if (a0(i, j) != 0.0 || a1(i, j) != 0.0 || a2(i, j) != 0.0) trip.emplace_back(i, j, 1.0);
    }
  }
  a_.resize(n_, n_);
  a_.setFromTriplets(trip.begin(), trip.end());
  a_.makeCompressed();
  const Index nnz = a_.nonZeros();
  v0_.resize(nnz);
  v1_.resize(nnz);
  v2_.resize(nnz);
  for (Index i = 0; i < n_; ++i) {
    for (decltype(a_)::InnerIterator it(a_, i); it; ++it) {
      Index k = &it.valueRef() - a_.valuePtr();
      v0_[k] = a0(i, it.col());
      v1_[k] = a1(i, it.col());
      v2_[k] = a2(i, it.col());
    }
  }
  x_.resize(n_, n_);
  term_.resize(n_, n_);
  next_.resize(n_, n_);
  reset();
}

void ProtocolStepper::reset() {
  x_.setIdentity();
  terms_ = 0;
}

void ProtocolStepper::step(double lambda, double dt) {
  double* v = a_.valuePtr();
  const double l2 = lambda * lambda;
  for (size_t k = 0; k < v0_.size(); ++k) v[k] = v0_[k] + lambda * v1_[k] + l2 * v2_[k];

  // truncated Taylor series of exp(A dt) applied to X; in balanced
  // coordinates ||A dt|| is about omega_max dt so terms fall off fast
  constexpr double kTol = std::numeric_limits<double>::epsilon();
  constexpr int kMaxTerms = 60;
  term_ = x_;
  double acc_norm = x_.cwiseAbs().maxCoeff();
  int k = 1;
  for (; k <= kMaxTerms; ++k) {
    next_.noalias() = a_ * term_;
    next_ *= dt / k;
    term_.swap(next_);
    x_ += term_;
    ++terms_;
    double tn = term_.cwiseAbs().maxCoeff();
    if (tn <= kTol * acc_norm) break;
  }
  if (k > kMaxTerms) throw NumericalError("ProtocolStepper: Taylor series did not converge; step too large");
}

Matrix ProtocolStepper::physical() const { return unbalance(Matrix(x_), scale_); }

namespace {

Matrix run_protocol(ProtocolStepper& stepper, const Protocol& protocol, double dt_target,
                    double& dt_used, long& steps) {
  steps = static_cast<long>(std::ceil(protocol.t_d / dt_target - 1e-9));
  steps = std::max(steps, 1L);
  dt_used = protocol.t_d / static_cast<double>(steps);
  const double t_d = protocol.t_d;
  const int p = protocol.exponent;
  return stepper.run([&](double t) { return std::pow(1.0 - t / t_d, p); }, steps, dt_used);
}

}  // namespace

ProtocolPropagation propagate_protocol(const ClModel& model, const Protocol& protocol,
                                       const StepperConfig& cfg, const CovarianceMatrix* thermal) {
  cfg.validate();
  if (protocol.t_d < 0.0) throw std::invalid_argument("protocol.t_d: must be >= 0");
  if (protocol.exponent < 1) throw std::invalid_argument("protocol.exponent: must be >= 1");
  ProtocolPropagation out;
  if (protocol.t_d == 0.0) {
    out.transform = SymplecticTransform::identity(model.dim() / 2);
    return out;
  }
  ProtocolStepper stepper(model.h_decoupled().matrix(), model.coupling_part(), model.counter_part());
  double dt = cfg.dt > 0.0 ? cfg.dt : default_step(protocol.t_d);
  dt = std::min(dt, protocol.t_d);
  Matrix s = run_protocol(stepper, protocol, dt, out.dt, out.steps);

  if (cfg.refine) {
    std::optional<CovarianceMatrix> own;
    if (thermal == nullptr) {
      own = thermal_cm(model.h_coupled(), model.spec().beta);
      thermal = &*own;
    }
    const Matrix& sth = thermal->matrix();
    const double e_ref = mean_energy(model.h_coupled().matrix(), sth);
    const Matrix v = model.v_full();
    const double scale = std::max(std::abs(mean_energy(v, sth)), 1e-300);
    auto work = [&](const Matrix& sm) {
      return mean_energy(model.h_decoupled().matrix(), sm * sth * sm.transpose()) - e_ref;
    };
    double w_prev = work(s);
    bool converged = false;
    for (int h = 1; h <= cfg.max_halvings; ++h) {
      double dt_new = out.dt / 2.0;
      double dt_used = 0.0;
      long steps = 0;
      Matrix s_new = run_protocol(stepper, protocol, dt_new, dt_used, steps);
      double w_new = work(s_new);
      double rel = std::abs(w_new - w_prev) / std::max(std::abs(w_new), scale);
      s = std::move(s_new);
      out.dt = dt_used;
      out.steps = steps;
      out.halvings = h;
      out.last_relative_change = rel;
      w_prev = w_new;
      if (rel < cfg.work_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericalError("propagator_protocol: W_d not converged after " +
                           std::to_string(cfg.max_halvings) + " halvings");
    }
  }
  out.transform = SymplecticTransform(std::move(s), cfg.sympl_tol);
  return out;
}

SymplecticTransform propagator_protocol(const ClModel& model, const Protocol& protocol,
                                        const StepperConfig& cfg) {
  return propagate_protocol(model, protocol, cfg).transform;
}

CovarianceMatrix evolve(const CovarianceMatrix& s, const Matrix& S) {
  if (S.rows() != s.dim() || S.cols() != s.dim()) throw std::invalid_argument("evolve: dimension mismatch");
  Matrix tmp = S * s.matrix();
  return CovarianceMatrix::symmetrized(tmp * S.transpose());
}

CovarianceMatrix evolve(const CovarianceMatrix& s, const SymplecticTransform& S) {
  return evolve(s, S.matrix());
}

SymplecticTransform free_bath_propagator(const HamiltonianMatrix& h_active,
                                         std::span<const Index> active_modes,
                                         const HamiltonianMatrix& h_free,
                                         std::span<const Index> free_modes, double t) {
  if (h_active.n_modes() != static_cast<Index>(active_modes.size()) ||
      h_free.n_modes() != static_cast<Index>(free_modes.size())) {
    throw std::invalid_argument("evolve_with_free_bath: Hamiltonian size does not match its mode set");
  }
  const Index total = h_active.n_modes() + h_free.n_modes();
  std::set<Index> seen;
  for (Index m : active_modes) seen.insert(m);
  for (Index m : free_modes) {
    if (!seen.insert(m).second) throw std::invalid_argument("evolve_with_free_bath: mode sets overlap");
  }
  if (static_cast<Index>(seen.size()) != total || *seen.begin() != 0 || *seen.rbegin() != total - 1) {
    throw std::invalid_argument("evolve_with_free_bath: mode sets must cover 0..M-1");
  }
  Matrix full = Matrix::Zero(2 * total, 2 * total);
  auto embed = [&](const Matrix& part, std::span<const Index> modes) {
    for (size_t a = 0; a < modes.size(); ++a) {
      for (size_t b = 0; b < modes.size(); ++b) {
        full.block<2, 2>(2 * modes[a], 2 * modes[b]) = part.block<2, 2>(2 * a, 2 * b);
      }
    }
  };
  embed(propagator_const(h_active, t).matrix(), active_modes);
  embed(propagator_const(h_free, t).matrix(), free_modes);
  return SymplecticTransform(std::move(full));
}

CovarianceMatrix evolve_with_free_bath(const CovarianceMatrix& s, const HamiltonianMatrix& h_active,
                                       std::span<const Index> active_modes,
                                       const HamiltonianMatrix& h_free,
                                       std::span<const Index> free_modes, double t) {
  return evolve(s, free_bath_propagator(h_active, active_modes, h_free, free_modes, t));
}

}  // namespace gb
