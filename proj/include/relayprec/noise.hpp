// Seeded batches of circular complex Gaussian noise shared across objective evaluations.
#pragma once

#include "relayprec/linalg.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>

namespace relayprec {

/// N i.i.d. CN(0, I) vectors stored as the columns of a dim × N matrix.
///
/// Reproducible bit-for-bit from (dim, N, seed): entries are drawn column by column, real part
/// first, from a mt19937_64 stream seeded with `seed`.
class NoiseBatch {
 public:
  NoiseBatch() = default;

  static NoiseBatch generate(int dim, std::size_t count, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("noise dimension must be >= 1");
    if (count < 1) throw std::invalid_argument("noise batch needs at least one sample");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    CMatrix s(dim, static_cast<Eigen::Index>(count));
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s(i, j) = cdouble(re, im);
      }
    return NoiseBatch(std::move(s), seed);
  }

  /// The batch with every sample mapped n ↦ U·n (seed carried over).
  NoiseBatch rotated(const CMatrix& u) const { return NoiseBatch(u * samples_, seed_); }

  int dim() const { return static_cast<int>(samples_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(samples_.cols()); }
  std::uint64_t seed() const { return seed_; }
  const CMatrix& samples() const { return samples_; }

 private:
  NoiseBatch(CMatrix s, std::uint64_t seed) : samples_(std::move(s)), seed_(seed) {}
  CMatrix samples_;
  std::uint64_t seed_ = 0;
};

}  // namespace relayprec
