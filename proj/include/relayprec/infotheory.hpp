// Monte Carlo estimation of finite-alphabet mutual information and of the MMSE matrix for
// y = H·P·x + n, x uniform over a SymbolSpace, n ~ CN(0, I).
#pragma once

#include "relayprec/constellation.hpp"
#include "relayprec/linalg.hpp"
#include "relayprec/noise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace relayprec {

struct MiEstimate {
  double bits_per_use = 0;  // I(x;y)/(2L), base 2
  double std_err = 0;       // standard error of bits_per_use
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double block_nats = 0;     // I(x;y) over the whole block, natural log
  double block_nats_err = 0;
};

struct MmseMatrix {
  CMatrix E;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

struct EstimatorOptions {
  /// Worker threads; results do not depend on this value.
  unsigned workers = 1;
};

inline constexpr std::size_t kDefaultOptSamples = 2000;
inline constexpr std::size_t kDefaultReportSamples = 100000;
inline constexpr std::size_t kDefaultOracleSamples = 1000000;
inline constexpr std::size_t kMinOracleSamples = 100000;

namespace detail {

inline void check_inputs(const CMatrix& h, const CMatrix& p, const SymbolSpace& space, const NoiseBatch& noise) {
  const Eigen::Index d = space.dim();
  auto shape = [](const CMatrix& a) { return std::to_string(a.rows()) + "x" + std::to_string(a.cols()); };
  if (h.rows() != d || h.cols() != d) throw std::invalid_argument("channel H is " + shape(h) + ", expected 2L x 2L");
  if (p.rows() != d || p.cols() != d) throw std::invalid_argument("precoder P is " + shape(p) + ", expected 2L x 2L");
  if (noise.dim() != d) throw std::invalid_argument("noise dimension does not match 2L");
  if (noise.size() < 1) throw std::invalid_argument("noise batch is empty");
  if (!h.allFinite() || !p.allFinite()) throw numerical_error("H or P has non-finite entries");
}

/// Shared inner kernel. For every noise sample n and every transmitted index m it evaluates
/// e_k = -‖HP(x_m - x_k) + n‖² over all k, which is both the exponent of the MI double sum
/// (after adding ‖n‖²) and the log-posterior of x_k given y = HPx_m + n.
///
/// Work is split into fixed-size chunks of samples reduced in chunk order,
/// so the result is bitwise independent of the worker count.
class Kernel {
 public:
  static constexpr std::size_t kChunk = 64;

  Kernel(const CMatrix& h, const CMatrix& p, const SymbolSpace& space, const NoiseBatch& noise, bool want_mmse)
      : space_(space), noise_(noise), want_mmse_(want_mmse) {
    check_inputs(h, p, space, noise);
    dim_ = space.dim();
    count_ = space.size();
    const CMatrix s = h * p * space.vectors();
    sre_.resize(dim_ * count_);
    sim_.resize(dim_ * count_);
    for (std::size_t k = 0; k < count_; ++k)
      for (std::size_t i = 0; i < dim_; ++i) {
        sre_[k * dim_ + i] = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)).real();
        sim_[k * dim_ + i] = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)).imag();
      }
  }

  struct Chunk {
    std::vector<double> per_sample;  // (1/K)Σ_m [lse_m − log K], lse_m >= 0
    std::vector<double> weight;      // Σ over (n, m) of posterior weight of x_k
    CMatrix xhat_outer;              // Σ over (n, m) of x̂ x̂ᴴ
  };

  std::vector<Chunk> run(unsigned workers) const {
    const std::size_t n = noise_.size();
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<Chunk> out(chunks);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t c = next++; c < chunks; c = next++) process(c, out[c]);
    };
    const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
    if (w == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(w);
      for (unsigned i = 0; i < w; ++i) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    return out;
  }

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }

 private:
  void process(std::size_t c, Chunk& out) const {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(noise_.size(), begin + kChunk);
    const double log_k = std::log(static_cast<double>(count_));
    const CMatrix& xs = space_.vectors();
    std::vector<double> e(count_);
    std::vector<double> are(dim_), aim(dim_);
    CVector xhat(static_cast<Eigen::Index>(dim_));
    out.per_sample.reserve(end - begin);
    if (want_mmse_) {
      out.weight.assign(count_, 0.0);
      out.xhat_outer = CMatrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    }
    for (std::size_t j = begin; j < end; ++j) {
      const auto nz = noise_.samples().col(static_cast<Eigen::Index>(j));
      // Same accumulation order as d2 below, so H = 0 yields exponents of exactly zero.
      double nn = 0;
      for (std::size_t i = 0; i < dim_; ++i) {
        const double r = nz(static_cast<Eigen::Index>(i)).real();
        const double q = nz(static_cast<Eigen::Index>(i)).imag();
        nn += r * r + q * q;
      }
      double acc = 0;
      for (std::size_t m = 0; m < count_; ++m) {
        // a = HPx_m + n = y
        for (std::size_t i = 0; i < dim_; ++i) {
          are[i] = sre_[m * dim_ + i] + nz(static_cast<Eigen::Index>(i)).real();
          aim[i] = sim_[m * dim_ + i] + nz(static_cast<Eigen::Index>(i)).imag();
        }
        double emax = -INFINITY;
        for (std::size_t k = 0; k < count_; ++k) {
          double d2 = 0;
          const double* kr = &sre_[k * dim_];
          const double* ki = &sim_[k * dim_];
          for (std::size_t i = 0; i < dim_; ++i) {
            const double dr = are[i] - kr[i];
            const double di = aim[i] - ki[i];
            d2 += dr * dr + di * di;
          }
          // y − HPx_m is n itself; pin that exponent to 0 so the log-sum-exp is never negative.
          e[k] = k == m ? 0.0 : nn - d2;
          emax = std::max(emax, e[k]);
        }
        double z = 0;
        for (std::size_t k = 0; k < count_; ++k) {
          e[k] = std::exp(e[k] - emax);
          z += e[k];
        }
        acc += (emax + std::log(z)) - log_k;
        if (want_mmse_) {
          const double inv = 1.0 / z;
          xhat.setZero();
          for (std::size_t k = 0; k < count_; ++k) {
            const double wk = e[k] * inv;
            out.weight[k] += wk;
            xhat += wk * xs.col(static_cast<Eigen::Index>(k));
          }
          out.xhat_outer.noalias() += xhat * xhat.adjoint();
        }
      }
      out.per_sample.push_back(acc / static_cast<double>(count_));
    }
  }

  const SymbolSpace& space_;
  const NoiseBatch& noise_;
  bool want_mmse_;
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> sre_, sim_;
};

inline MiEstimate reduce_mi(const std::vector<Kernel::Chunk>& chunks, std::size_t dim, std::uint64_t seed) {
  // Neumaier summation: near saturation the naive sum drifts past log2 M by ~N·eps.
  std::size_t n = 0;
  double sum = 0, comp = 0;
  for (const auto& c : chunks)
    for (double v : c.per_sample) {
      const double t = sum + v;
      comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
      ++n;
    }
  const double mean = (sum + comp) / static_cast<double>(n);
  double ss = 0;
  for (const auto& c : chunks)
    for (double v : c.per_sample) ss += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

  MiEstimate est;
  est.samples = n;
  est.seed = seed;
  est.block_nats = 0.0 - mean;
  est.block_nats_err = sd / std::sqrt(static_cast<double>(n));
  const double to_bits = 1.0 / (static_cast<double>(dim) * kLn2);
  est.bits_per_use = est.block_nats * to_bits + 0.0;
  est.std_err = est.block_nats_err * to_bits;
  return est;
}

inline MmseMatrix reduce_mmse(const std::vector<Kernel::Chunk>& chunks, const SymbolSpace& space, std::size_t samples,
                              std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(space.dim());
  std::vector<double> weight(space.size(), 0.0);
  CMatrix xhat_outer = CMatrix::Zero(d, d);
  for (const auto& c : chunks) {
    for (std::size_t k = 0; k < weight.size(); ++k) weight[k] += c.weight[k];
    xhat_outer += c.xhat_outer;
  }
  // Average posterior covariance: Σ_k W_k x_k x_kᴴ − Σ x̂x̂ᴴ, normalized by N·K.
  CMatrix second = CMatrix::Zero(d, d);
  const CMatrix& xs = space.vectors();
  for (std::size_t k = 0; k < weight.size(); ++k) {
    const auto x = xs.col(static_cast<Eigen::Index>(k));
    second.noalias() += weight[k] * (x * x.adjoint());
  }
  const double norm = 1.0 / (static_cast<double>(samples) * static_cast<double>(space.size()));
  MmseMatrix out;
  out.E = hermitian_part((second - xhat_outer) * norm);
  out.samples = samples;
  out.seed = seed;
  if (!out.E.allFinite()) throw numerical_error("MMSE estimate has non-finite entries");
  return out;
}

}  // namespace detail

/// Estimate of I(x;y) with the expectation over n replaced by the mean over `noise`.
inline MiEstimate mutual_information(const CMatrix& h, const CMatrix& p, const SymbolSpace& space,
                                     const NoiseBatch& noise, const EstimatorOptions& opts = {}) {
  const detail::Kernel kernel(h, p, space, noise, false);
  return detail::reduce_mi(kernel.run(opts.workers), kernel.dim(), noise.seed());
}

/// MMSE matrix E = E[(x − x̂)(x − x̂)ᴴ], estimated as the sample mean of the posterior
/// covariance Cov(x | y) over y = HPx_m + n for every m and every batch sample.
inline MmseMatrix mmse_matrix(const CMatrix& h, const CMatrix& p, const SymbolSpace& space, const NoiseBatch& noise,
                              const EstimatorOptions& opts = {}) {
  const detail::Kernel kernel(h, p, space, noise, true);
  return detail::reduce_mmse(kernel.run(opts.workers), space, noise.size(), noise.seed());
}

struct MiAndMmse {
  MiEstimate mi;
  MmseMatrix mmse;
};

/// Both estimates from a single pass over the batch.
inline MiAndMmse mi_and_mmse(const CMatrix& h, const CMatrix& p, const SymbolSpace& space, const NoiseBatch& noise,
                             const EstimatorOptions& opts = {}) {
  const detail::Kernel kernel(h, p, space, noise, true);
  const auto chunks = kernel.run(opts.workers);
  return {detail::reduce_mi(chunks, kernel.dim(), noise.seed()),
          detail::reduce_mmse(chunks, space, noise.size(), noise.seed())};
}

/// Stream tag separating oracle noise from every batch drawn elsewhere with the same seed.
inline constexpr std::uint64_t kOracleStream = 0x0AC1E;

/// High-N reference estimate on its own RNG substream.
inline MiEstimate mutual_information_oracle(const CMatrix& h, const CMatrix& p, const SymbolSpace& space,
                                            std::size_t samples, std::uint64_t seed,
                                            const EstimatorOptions& opts = {}) {
  if (samples < kMinOracleSamples)
    throw std::invalid_argument("oracle estimate needs at least 1e5 samples (got " + std::to_string(samples) + ")");
  const auto noise = NoiseBatch::generate(space.dim(), samples, mix_seed(seed, kOracleStream));
  auto est = mutual_information(h, p, space, noise, opts);
  est.seed = seed;
  return est;
}

struct Stationarity {
  double mu = 0;
  double residual = 0;
};

/// Fits μ in μP = HᴴHPE and reports ‖HᴴHPE − μP‖_F / ‖HᴴHPE‖_F (0 when HᴴHPE = 0).
inline Stationarity check_stationarity(const CMatrix& h, const CMatrix& p, const MmseMatrix& e) {
  const double pn = p.squaredNorm();
  if (pn == 0.0) throw std::invalid_argument("stationarity check needs a nonzero precoder");
  const CMatrix g = h.adjoint() * h * p * e.E;
  const double gn = g.norm();
  Stationarity out;
  out.mu = real_inner(p, g) / pn;
  out.residual = gn == 0.0 ? 0.0 : (g - out.mu * p).norm() / gn;
  return out;
}

/// |I(x; Uy) − I(x; y)| evaluated with the batch rotated alongside the channel.
inline double unitary_invariance_check(const CMatrix& h, const CMatrix& p, const SymbolSpace& space,
                                       const NoiseBatch& noise, const CMatrix& u, const EstimatorOptions& opts = {}) {
  if (!is_unitary(u, 1e-10)) throw std::invalid_argument("unitary_invariance_check: U is not unitary within 1e-10");
  const auto base = mutual_information(h, p, space, noise, opts);
  const auto rot = mutual_information(u * h, p, space, noise.rotated(u), opts);
  return std::abs(rot.bits_per_use - base.bits_per_use);
}

}  // namespace relayprec
