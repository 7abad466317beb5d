// Unitary (square complex Stiefel) manifold: validated points, the tangent-space MI gradient,
// and the SVD projection used as retraction.
#pragma once

#include "relayprec/infotheory.hpp"
#include "relayprec/linalg.hpp"

#include <stdexcept>
#include <string>

namespace relayprec {

inline constexpr double kUnitaryTol = 1e-8;

/// n × n matrix with VᴴV = VVᴴ = I within 1e-8 (Frobenius).
class UnitaryPoint {
 public:
  explicit UnitaryPoint(CMatrix v) : v_(std::move(v)) {
    const double err = unitarity_error(v_);
    if (!(err <= kUnitaryTol))
      throw std::invalid_argument("matrix is not unitary (error " + std::to_string(err) + ")");
  }
  static UnitaryPoint identity(Eigen::Index n) { return UnitaryPoint(CMatrix::Identity(n, n)); }

  const CMatrix& matrix() const { return v_; }
  Eigen::Index dim() const { return v_.rows(); }

 private:
  CMatrix v_;
};

struct TangentDirection {
  CMatrix D;
  double squared_norm() const { return D.squaredNorm(); }
};

/// ∇_V g for g(V) = −I(V) in y = Diag(σ)Diag(√λ)V·x + n:
///   −Diag²(σ)Diag(λ)·V·E + V·E·Vᴴ·Diag²(σ)Diag(λ)·V.
/// Its Frobenius inner product with a tangent perturbation is the directional derivative of the
/// block MI in nats (negated). The descent direction is the negation of the returned value.
inline TangentDirection stiefel_gradient(const RVector& sigma, const RVector& lambda, const UnitaryPoint& v,
                                         const MmseMatrix& e) {
  const auto n = v.dim();
  if (sigma.size() != n || lambda.size() != n || e.E.rows() != n || e.E.cols() != n)
    throw std::invalid_argument("stiefel_gradient: dimension mismatch");
  if ((lambda.array() < 0).any()) throw std::invalid_argument("stiefel_gradient: lambda must be nonnegative");
  const CMatrix a = (sigma.array().square() * lambda.array()).matrix().cast<cdouble>().asDiagonal();
  const CMatrix& vm = v.matrix();
  const CMatrix ave = a * vm * e.E;
  return {-ave + vm * e.E * vm.adjoint() * a * vm};
}

/// Closest unitary matrix to W in Frobenius norm: U_W·V_Wᴴ from W = U_W Σ V_Wᴴ.
inline UnitaryPoint project_to_stiefel(const CMatrix& w) {
  if (w.rows() != w.cols()) throw std::invalid_argument("project_to_stiefel: matrix must be square");
  const Svd s = svd(w);
  const double smax = s.sigma(0);
  const double smin = s.sigma(s.sigma.size() - 1);
  if (!(smax > 0) || smin <= 1e-12 * smax)
    throw singularity_error("project_to_stiefel: matrix is rank deficient (sigma_min/sigma_max = " +
                            std::to_string(smax > 0 ? smin / smax : 0.0) + ")");
  CMatrix q = s.U * s.V.adjoint();
  if (unitarity_error(q) > 1e-10) throw numerical_error("project_to_stiefel: projection lost unitarity");
  return UnitaryPoint(std::move(q));
}

}  // namespace relayprec
