// Reference precoders: direct projected gradient ascent on P, Gaussian-input waterfilling, and
// no precoding.
#pragma once

#include "relayprec/line_search.hpp"
#include "relayprec/objective.hpp"
#include "relayprec/two_step.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace relayprec {

/// Rescales P onto Tr(PPᴴ) = 2L only when the budget is exceeded.
inline CMatrix project_power(const CMatrix& p) {
  const double budget = static_cast<double>(p.rows());
  const double pw = precoder_power(p);
  return pw > budget ? CMatrix(p * std::sqrt(budget / pw)) : p;
}

/// Projected gradient ascent P ← proj(P + γ·HᴴHPE) from `start` (identity by default).
///
/// HᴴHPE is ∂I/∂P* in nats, so the first-order gain of a step to P' is 2·Re⟨HᴴHPE, P' − P⟩;
/// the doubling/halving search compares the realized gain with that prediction along the
/// projected path. Each iteration uses a fresh working batch shared by all its trials.
inline OptimizerReport direct_gradient_baseline(const EffectiveChannel& ch, const SymbolSpace& space,
                                                const OptimizerConfig& cfg, std::uint64_t seed,
                                                std::optional<CMatrix> start = std::nullopt) {
  cfg.validate();
  PrecoderObjective obj(ch, space, cfg, seed);
  const int n = space.dim();
  const auto report_batch = NoiseBatch::generate(n, cfg.report_samples, mix_seed(seed, stream::kReport));
  const CMatrix hh = ch.H.adjoint() * ch.H;

  OptimizerReport rep;
  rep.method = "gradient";
  rep.seed = seed;
  CMatrix p = start.value_or(CMatrix::Identity(n, n));
  if (p.rows() != n || p.cols() != n) throw std::invalid_argument("direct gradient start has wrong dimensions");
  if (precoder_power(p) > n + kPowerSlack) throw std::invalid_argument("direct gradient start violates the power budget");

  obj.attach_trace(&rep.mi_trace);
  obj.record(p, Phase::Gradient);
  rep.initial_mi = detail::report_estimate(obj, report_batch, p);
  rep.initial_residual = p.squaredNorm() > 0 ? detail::stationarity_residual(obj, p) : 0.0;

  rep.converged = false;
  for (int it = 0; it < cfg.max_gradient_iters; ++it) {
    obj.refresh(stream::kGradientBase + static_cast<std::uint64_t>(it));
    const auto ev = obj.evaluate(p);
    const CMatrix grad = hh * p * ev.mmse.E;
    if (grad.squaredNorm() < cfg.gradient_tol) {
      rep.converged = true;
      break;
    }
    const double f0 = -ev.mi.block_nats;
    auto trial = [&](double g) {
      const CMatrix cand = project_power(p + g * grad);
      return std::pair{-obj.block_nats(cand), 2.0 * real_inner(grad, cand - p)};
    };
    const auto ls = doubling_halving_search(f0, trial, cfg.line_search);
    if (!ls.accepted) {
      rep.converged = true;
      break;
    }
    p = project_power(p + ls.gamma * grad);
    ++rep.iterations;
    obj.record(p, Phase::Gradient);
  }
  rep.rounds = 1;
  rep.final.emplace(factor_precoder(p));
  rep.final_mi = detail::report_estimate(obj, report_batch, p);
  rep.final_residual = p.squaredNorm() > 0 ? detail::stationarity_residual(obj, p) : 0.0;
  return rep;
}

/// Gaussian-input capacity design: U = V_H, V = I, λ_i = max(0, ν − 1/σ_i²) with Σλ = 2L.
inline Precoder gaussian_waterfilling_baseline(const EffectiveChannel& ch) {
  const RVector& sigma = ch.sigma();
  const auto n = sigma.size();
  const double budget = static_cast<double>(n);
  RVector lambda = RVector::Constant(n, 1.0);
  if ((sigma.array() > 0).any()) {
    RVector inv(n);
    for (Eigen::Index i = 0; i < n; ++i) inv(i) = sigma(i) > 0 ? 1.0 / (sigma(i) * sigma(i)) : INFINITY;
    auto fill = [&](double nu) {
      RVector l(n);
      for (Eigen::Index i = 0; i < n; ++i) l(i) = std::max(0.0, nu - inv(i));
      return l;
    };
    double lo = 0.0;
    double hi = budget + inv.minCoeff();
    while (fill(hi).sum() < budget) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      (fill(mid).sum() < budget ? lo : hi) = mid;
    }
    lambda = fill(hi);
    lambda *= budget / lambda.sum();
  }
  return Precoder(ch.right_singular(), lambda, UnitaryPoint::identity(n));
}

inline Precoder no_precoding(Eigen::Index dim) {
  return Precoder(CMatrix::Identity(dim, dim), RVector::Constant(dim, 1.0), UnitaryPoint::identity(dim));
}

}  // namespace relayprec
