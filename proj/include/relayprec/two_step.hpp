// Alternating optimization of the generalized precoder: U fixed to the channel's right singular
// vectors, then rounds of power allocation and rotation until the MI stops improving.
#pragma once

#include "relayprec/objective.hpp"
#include "relayprec/power_allocation.hpp"
#include "relayprec/rotation.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace relayprec {

struct OptimizerReport {
  std::string method;
  std::vector<TraceEntry> mi_trace;
  std::optional<Precoder> final;
  MiEstimate initial_mi;  // report-grade
  MiEstimate final_mi;    // report-grade
  bool converged = false;
  int rounds = 0;
  int iterations = 0;
  std::uint64_t seed = 0;
  double initial_residual = 0;  // stationarity diagnostic on the trace batch
  double final_residual = 0;
  std::string error;  // set when a phase failed; the trace and final precoder hold the last good state
};

/// SVD factorization of a dense precoder into the (U, λ, V) form (V = right factor in rows).
inline Precoder factor_precoder(const CMatrix& p) {
  const Svd s = svd(p);
  return Precoder(s.U, s.sigma.array().square().matrix(), UnitaryPoint(s.V.adjoint()));
}

namespace detail {
inline MiEstimate report_estimate(const PrecoderObjective& obj, const NoiseBatch& batch, const CMatrix& p) {
  return mutual_information(obj.channel().H, p, obj.space(), batch, obj.config().estimator);
}
inline double stationarity_residual(const PrecoderObjective& obj, const CMatrix& p) {
  if (p.squaredNorm() == 0.0) return 0.0;
  return check_stationarity(obj.channel().H, p, obj.trace_mmse(p)).residual;
}
}  // namespace detail

/// Runs the two-step algorithm. Round r draws a fresh working batch from mix_seed(seed, 1000 + r);
/// rounds after the first restart the barrier at the previous final t. Stops when the report-grade
/// MI (fixed batch) gains less than tol_outer standard errors, or after max_outer rounds.
inline OptimizerReport optimize_two_step(const EffectiveChannel& ch, const SymbolSpace& space,
                                         const OptimizerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  PrecoderObjective obj(ch, space, cfg, seed);
  const int n = space.dim();
  const auto report_batch = NoiseBatch::generate(n, cfg.report_samples, mix_seed(seed, stream::kReport));

  OptimizerReport rep;
  rep.method = "two-step";
  rep.seed = seed;

  RVector lambda = RVector::Constant(n, 1.0 - cfg.initial_shrink);
  UnitaryPoint v = UnitaryPoint::identity(n);
  if (cfg.random_rotation_start) {
    std::mt19937_64 rng(mix_seed(seed, stream::kRotationStart));
    v = UnitaryPoint(random_unitary(n, rng));
  }

  obj.attach_trace(&rep.mi_trace);
  CMatrix p = obj.precoder(lambda, v);
  obj.record(p, Phase::Power);
  rep.initial_mi = detail::report_estimate(obj, report_batch, p);
  rep.initial_residual = detail::stationarity_residual(obj, p);

  MiEstimate prev = rep.initial_mi;
  std::optional<double> t_start;
  bool inner_ok = true;
  try {
    for (int round = 0; round < cfg.max_outer; ++round) {
      obj.refresh(stream::kWorkingBase + static_cast<std::uint64_t>(round));
      const auto pw = optimize_power(lambda, v, cfg.barrier, obj, t_start);
      lambda = pw.lambda;
      t_start = pw.final_t;
      const auto rot = optimize_rotation(v, lambda, cfg.rotation, obj);
      v = rot.V;
      inner_ok = inner_ok && pw.converged && rot.converged;
      rep.iterations += pw.iterations + rot.iterations;
      rep.rounds = round + 1;

      const auto cur = detail::report_estimate(obj, report_batch, obj.precoder(lambda, v));
      const bool stalled = cur.bits_per_use - prev.bits_per_use < cfg.tol_outer * cur.std_err;
      prev = cur;
      if (stalled) {
        rep.converged = true;
        break;
      }
    }
  } catch (const numerical_error& e) {
    rep.error = e.what();
    inner_ok = false;
  }
  rep.converged = rep.converged && inner_ok;
  rep.final.emplace(obj.left(), lambda, v);
  p = rep.final->matrix();
  rep.final_mi = prev;
  rep.final_residual = detail::stationarity_residual(obj, p);
  return rep;
}

}  // namespace relayprec
