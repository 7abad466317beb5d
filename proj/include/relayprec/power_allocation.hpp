// Power allocation over the channel eigenmodes for a fixed right factor V: the MI is concave in
// λ, so a log-barrier steepest descent over {λ > 0, 1ᵀλ < 2L} reaches the global optimum.
#pragma once

#include "relayprec/line_search.hpp"
#include "relayprec/manifold.hpp"
#include "relayprec/objective.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace relayprec {

/// ∂I/∂λ_i = σ_i²·[V E Vᴴ]_ii (block MI in nats).
inline RVector power_jacobian(const RVector& sigma, const UnitaryPoint& v, const MmseMatrix& e) {
  const auto n = v.dim();
  if (sigma.size() != n || e.E.rows() != n || e.E.cols() != n)
    throw std::invalid_argument("power_jacobian: dimension mismatch");
  const CMatrix vev = v.matrix() * e.E * v.matrix().adjoint();
  RVector j(n);
  for (Eigen::Index i = 0; i < n; ++i) j(i) = sigma(i) * sigma(i) * vev(i, i).real();
  return j;
}

/// True when λ_i > 0 for all i and 1ᵀλ < 2L.
inline bool strictly_interior(const RVector& lambda) {
  return (lambda.array() > 0).all() && lambda.sum() < static_cast<double>(lambda.size());
}

/// Σ_i φ(−λ_i) + φ(1ᵀλ − 2L) with φ(u) = −(1/t)·ln(−u); +∞ outside the open domain.
inline double barrier_penalty(const RVector& lambda, double t) {
  if (!strictly_interior(lambda)) return INFINITY;
  const double slack = static_cast<double>(lambda.size()) - lambda.sum();
  return -(lambda.array().log().sum() + std::log(slack)) / t;
}

/// f(λ) = −I(λ) + barrier. `block_nats(λ)` supplies I in nats and is not called outside the domain.
template <class MiFn>
double barrier_objective(const RVector& lambda, double t, MiFn&& block_nats) {
  const double pen = barrier_penalty(lambda, t);
  if (!std::isfinite(pen)) return INFINITY;
  return -block_nats(lambda) + pen;
}

/// ∇f = −∇I − (1/t)(q − 1/(2L − 1ᵀλ)·1), q_i = 1/λ_i.
inline RVector barrier_gradient(const RVector& lambda, double t, const RVector& sigma, const UnitaryPoint& v,
                                const MmseMatrix& e) {
  if (!strictly_interior(lambda)) throw std::domain_error("barrier_gradient: lambda is not strictly interior");
  const double slack = static_cast<double>(lambda.size()) - lambda.sum();
  const RVector q = lambda.cwiseInverse();
  return -power_jacobian(sigma, v, e) - (q.array() - 1.0 / slack).matrix() / t;
}

struct PowerResult {
  RVector lambda;
  bool converged = true;
  int iterations = 0;
  double final_t = 0;
};

/// Barrier steepest descent. E is re-estimated at every accepted iterate on the objective's
/// current working batch; each line search holds both fixed. An inner loop also ends when the
/// halving limit is reached (the step can no longer beat the Monte Carlo noise floor).
/// `t_start` defaults to cfg.t0.
inline PowerResult optimize_power(const RVector& lambda0, const UnitaryPoint& v, const BarrierConfig& cfg,
                                  PrecoderObjective& obj, std::optional<double> t_start = std::nullopt) {
  cfg.validate();
  if (lambda0.size() != obj.dim()) throw std::invalid_argument("optimize_power: lambda has wrong dimension");
  if (!strictly_interior(lambda0)) throw std::invalid_argument("optimize_power: lambda0 must be strictly interior");

  const RVector& sigma = obj.sigma();
  auto mi_of = [&](const RVector& l) { return obj.block_nats(obj.precoder(l, v)); };

  PowerResult res;
  res.lambda = lambda0;
  double t = t_start.value_or(cfg.t0);
  for (;;) {
    for (int inner = 0;; ++inner) {
      const CMatrix p = obj.precoder(res.lambda, v);
      const auto ev = obj.evaluate(p);
      const double f0 = -ev.mi.block_nats + barrier_penalty(res.lambda, t);
      const RVector step = -barrier_gradient(res.lambda, t, sigma, v, ev.mmse);
      const double nd = step.squaredNorm();
      if (nd < cfg.grad_tol) break;
      if (inner >= cfg.max_inner_iters) {
        res.converged = false;
        break;
      }
      auto trial = [&](double g) {
        const RVector l = res.lambda + g * step;
        return std::pair{barrier_objective(l, t, mi_of), g * nd};
      };
      const auto ls = doubling_halving_search(f0, trial, obj.config().line_search);
      if (!ls.accepted) break;
      res.lambda += ls.gamma * step;
      ++res.iterations;
      obj.record(obj.precoder(res.lambda, v), Phase::Power);
    }
    if (1.0 / t < cfg.epsilon) break;
    t *= cfg.alpha;
  }
  res.final_t = t;
  return res;
}

}  // namespace relayprec
