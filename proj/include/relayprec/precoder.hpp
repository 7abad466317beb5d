// Factored linear precoder P = U·Diag(√λ)·V.
#pragma once

#include "relayprec/linalg.hpp"
#include "relayprec/manifold.hpp"

#include <stdexcept>
#include <string>

namespace relayprec {

inline constexpr double kPowerSlack = 1e-9;

/// U is the left singular factor, λ the squared singular values and V the right factor in the
/// row convention V = V_Pᴴ, so P = U·Diag(√λ)·V and Tr(PPᴴ) = Σλ.
struct Precoder {
  CMatrix U;
  RVector lambda;
  UnitaryPoint V;

  Precoder(CMatrix u, RVector l, UnitaryPoint v) : U(std::move(u)), lambda(std::move(l)), V(std::move(v)) {
    const auto n = V.dim();
    if (U.rows() != n || U.cols() != n || lambda.size() != n)
      throw std::invalid_argument("precoder factors have inconsistent dimensions");
    if ((lambda.array() < 0).any()) throw std::invalid_argument("power allocation must be nonnegative");
  }

  Eigen::Index dim() const { return V.dim(); }
  double power() const { return lambda.sum(); }

  CMatrix matrix() const { return U * lambda.cwiseSqrt().cast<cdouble>().asDiagonal() * V.matrix(); }

  /// Σλ ≤ 2L (+1e-9).
  bool feasible() const { return power() <= static_cast<double>(dim()) + kPowerSlack && (lambda.array() >= 0).all(); }
};

inline CMatrix materialize(const CMatrix& u, const RVector& lambda, const CMatrix& v) {
  return u * lambda.cwiseSqrt().cast<cdouble>().asDiagonal() * v;
}

inline double precoder_power(const CMatrix& p) { return (p * p.adjoint()).trace().real(); }

}  // namespace relayprec
