// Optimizer configuration, iteration traces and the Monte Carlo objective shared by all
// precoder optimizers (common random numbers: one working batch per comparison).
#pragma once

#include "relayprec/channel.hpp"
#include "relayprec/constellation.hpp"
#include "relayprec/infotheory.hpp"
#include "relayprec/line_search.hpp"
#include "relayprec/precoder.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayprec {

struct BarrierConfig {
  double t0 = 1.0;
  double alpha = 10.0;
  double epsilon = 1e-5;
  int max_inner_iters = 200;
  double grad_tol = 1e-6;

  void validate() const {
    if (!(t0 > 0)) throw std::invalid_argument("barrier t0 must be > 0");
    if (!(alpha > 1)) throw std::invalid_argument("barrier alpha must be > 1");
    if (!(epsilon > 0)) throw std::invalid_argument("barrier epsilon must be > 0");
    if (max_inner_iters < 1) throw std::invalid_argument("barrier max_inner_iters must be >= 1");
    if (!(grad_tol > 0)) throw std::invalid_argument("barrier grad_tol must be > 0");
  }
};

struct RotationConfig {
  int max_iters = 200;
  double grad_tol = 1e-6;
};

struct OptimizerConfig {
  BarrierConfig barrier;
  RotationConfig rotation;
  int max_outer = 20;
  /// Two-step rounds stop once the report-grade MI gains less than this many standard errors.
  double tol_outer = 1.0;
  int max_gradient_iters = 200;
  double gradient_tol = 1e-8;
  std::size_t opt_samples = kDefaultOptSamples;
  std::size_t trace_samples = 10000;
  std::size_t report_samples = kDefaultReportSamples;
  bool random_rotation_start = false;
  double initial_shrink = 1e-3;  // λ0 = (1 − shrink)·uniform
  LineSearchLimits line_search;
  EstimatorOptions estimator;

  void validate() const {
    barrier.validate();
    if (rotation.max_iters < 1 || max_outer < 1 || max_gradient_iters < 1)
      throw std::invalid_argument("iteration limits must be >= 1");
    if (!(rotation.grad_tol > 0) || !(gradient_tol > 0) || !(tol_outer >= 0))
      throw std::invalid_argument("tolerances must be positive");
    if (opt_samples < 1 || trace_samples < 1 || report_samples < 1)
      throw std::invalid_argument("sample counts must be >= 1");
    if (!(initial_shrink > 0 && initial_shrink < 1)) throw std::invalid_argument("initial_shrink must be in (0, 1)");
  }
};

enum class Phase { Power, Rotation, Gradient };

inline std::string to_string(Phase p) {
  switch (p) {
    case Phase::Power: return "power";
    case Phase::Rotation: return "rotation";
    case Phase::Gradient: return "gradient";
  }
  return "?";
}

struct TraceEntry {
  int iteration = 0;
  double bits_per_use = 0;
  double std_err = 0;
  Phase phase = Phase::Power;
};

/// Seed tags for the derived substreams of one run.
namespace stream {
inline constexpr std::uint64_t kTrace = 1;
inline constexpr std::uint64_t kReport = 2;
inline constexpr std::uint64_t kRotationStart = 3;
inline constexpr std::uint64_t kWorkingBase = 1000;
inline constexpr std::uint64_t kGradientBase = 1000000;
}  // namespace stream

/// Evaluates the block MI (nats) of precoders U·Diag(√λ)·V over a fixed channel,
/// on a working batch that the caller refreshes between comparisons.
class PrecoderObjective {
 public:
  PrecoderObjective(const EffectiveChannel& ch, const SymbolSpace& space, const OptimizerConfig& cfg, std::uint64_t seed)
      : channel_(ch),
        space_(space),
        cfg_(cfg),
        seed_(seed),
        trace_batch_(NoiseBatch::generate(space.dim(), cfg.trace_samples, mix_seed(seed, stream::kTrace))) {
    if (ch.dim() != space.dim()) throw std::invalid_argument("channel and symbol space dimensions differ");
    refresh(stream::kWorkingBase);
  }

  void refresh(std::uint64_t tag) {
    working_seed_ = mix_seed(seed_, tag);
    working_ = NoiseBatch::generate(space_.dim(), cfg_.opt_samples, working_seed_);
  }

  const EffectiveChannel& channel() const { return channel_; }
  const SymbolSpace& space() const { return space_; }
  const OptimizerConfig& config() const { return cfg_; }
  const NoiseBatch& working_batch() const { return working_; }
  std::uint64_t seed() const { return seed_; }
  const CMatrix& left() const { return channel_.right_singular(); }
  const RVector& sigma() const { return channel_.sigma(); }
  int dim() const { return space_.dim(); }

  CMatrix precoder(const RVector& lambda, const UnitaryPoint& v) const { return materialize(left(), lambda, v.matrix()); }

  double block_nats(const CMatrix& p) const {
    return mutual_information(channel_.H, p, space_, working_, cfg_.estimator).block_nats;
  }
  MiAndMmse evaluate(const CMatrix& p) const { return mi_and_mmse(channel_.H, p, space_, working_, cfg_.estimator); }

  MiEstimate trace_estimate(const CMatrix& p) const {
    return mutual_information(channel_.H, p, space_, trace_batch_, cfg_.estimator);
  }
  MmseMatrix trace_mmse(const CMatrix& p) const { return mmse_matrix(channel_.H, p, space_, trace_batch_, cfg_.estimator); }

  /// Appends the trace-batch MI of `p` when a trace is attached.
  void record(const CMatrix& p, Phase phase) {
    if (trace_ == nullptr) return;
    const auto est = trace_estimate(p);
    trace_->push_back({static_cast<int>(trace_->size()), est.bits_per_use, est.std_err, phase});
  }
  void attach_trace(std::vector<TraceEntry>* trace) { trace_ = trace; }

 private:
  const EffectiveChannel& channel_;
  const SymbolSpace& space_;
  OptimizerConfig cfg_;
  std::uint64_t seed_;
  std::uint64_t working_seed_ = 0;
  NoiseBatch working_;
  NoiseBatch trace_batch_;
  std::vector<TraceEntry>* trace_ = nullptr;
};

}  // namespace relayprec
