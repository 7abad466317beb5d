// Steepest descent of g(V) = −I(V) over unitary V with SVD-projection retraction.
#pragma once

#include "relayprec/line_search.hpp"
#include "relayprec/manifold.hpp"
#include "relayprec/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace relayprec {

struct RotationResult {
  UnitaryPoint V;
  bool converged = true;
  int iterations = 0;
};

/// π(W), retried once with W + 1e-10·I when W is numerically singular.
inline UnitaryPoint retract(const CMatrix& w) {
  try {
    return project_to_stiefel(w);
  } catch (const singularity_error&) {
    return project_to_stiefel(w + 1e-10 * CMatrix::Identity(w.rows(), w.cols()));
  }
}

/// Every trial point (line search included) is evaluated at π(V + γΔV), and the accepted step
/// is projected as well, so all iterates stay unitary.
inline RotationResult optimize_rotation(const UnitaryPoint& v0, const RVector& lambda, const RotationConfig& cfg,
                                        PrecoderObjective& obj) {
  if (v0.dim() != obj.dim() || lambda.size() != obj.dim())
    throw std::invalid_argument("optimize_rotation: dimension mismatch");
  const RVector& sigma = obj.sigma();
  RotationResult res{v0};
  for (int it = 0;; ++it) {
    const auto ev = obj.evaluate(obj.precoder(lambda, res.V));
    const double g0 = -ev.mi.block_nats;
    const CMatrix step = -stiefel_gradient(sigma, lambda, res.V, ev.mmse).D;
    const double nd = step.squaredNorm();
    if (nd < cfg.grad_tol) break;
    if (it >= cfg.max_iters) {
      res.converged = false;
      break;
    }
    auto trial = [&](double g) {
      const UnitaryPoint cand = retract(res.V.matrix() + g * step);
      return std::pair{-obj.block_nats(obj.precoder(lambda, cand)), g * nd};
    };
    const auto ls = doubling_halving_search(g0, trial, obj.config().line_search);
    if (!ls.accepted) break;
    res.V = retract(res.V.matrix() + ls.gamma * step);
    ++res.iterations;
    obj.record(obj.precoder(lambda, res.V), Phase::Rotation);
  }
  return res;
}

}  // namespace relayprec
