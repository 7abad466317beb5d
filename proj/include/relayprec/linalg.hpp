// Dense complex linear-algebra aliases and small helpers shared by every module.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace relayprec {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Raised when an estimator or factorization meets non-finite data or fails to converge.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the Stiefel projection when its argument is (numerically) rank deficient.
class singularity_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

/// Raised when an enumeration would exceed the configured memory guard.
class capacity_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr double kLn2 = 0.69314718055994530942;

inline bool all_finite(const CMatrix& a) { return a.allFinite(); }

/// Frobenius inner product Re tr(AᴴB).
inline double real_inner(const CMatrix& a, const CMatrix& b) { return (a.adjoint() * b).trace().real(); }

inline double unitarity_error(const CMatrix& v) {
  const auto n = v.rows();
  if (v.cols() != n) return INFINITY;
  const CMatrix id = CMatrix::Identity(n, n);
  return std::max((v.adjoint() * v - id).norm(), (v * v.adjoint() - id).norm());
}

inline bool is_unitary(const CMatrix& v, double tol) { return unitarity_error(v) <= tol; }

/// Hermitian part (A + Aᴴ)/2.
inline CMatrix hermitian_part(const CMatrix& a) { return (a + a.adjoint()) * 0.5; }

/// SVD with singular values in nonincreasing order (Eigen's convention) and full unitary factors.
struct Svd {
  CMatrix U;
  RVector sigma;
  CMatrix V;  // A = U·Diag(sigma)·Vᴴ
};

inline Svd svd(const CMatrix& a) {
  if (!a.allFinite()) throw numerical_error("svd: matrix has non-finite entries");
  Eigen::JacobiSVD<CMatrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw numerical_error("svd: decomposition failed (rows=" + std::to_string(a.rows()) +
                          ", norm=" + std::to_string(a.norm()) + ")");
  }
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

/// Haar-distributed random unitary: QR of a complex Ginibre matrix with the phases of diag(R) removed.
template <class Rng>
CMatrix random_unitary(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix z(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = cdouble(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

/// Complex Ginibre matrix, i.i.d. CN(0, 1) entries.
template <class Rng>
CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CMatrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = cdouble(gauss(rng), gauss(rng));
  return z;
}

/// SplitMix64 finalizer; used to derive independent substream seeds from (seed, tag).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace relayprec
