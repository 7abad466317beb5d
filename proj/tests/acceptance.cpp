// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
// Artifacts (CSV, JSON) are written to the directory given as argv[1] (default: ./acceptance_artifacts).

#include "oracles.hpp"
#include "relayprec/experiment.hpp"
#include "relayprec/power_allocation.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace relayprec;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  std::printf("%s %-4s %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EffectiveChannel ref_channel(double snr_db = 3.0) {
  return effective_channel(RelayNetworkParams::at_snr({0.4, 0}, {{{1.2, 0}, {0, -0.9}}}, snr_db, 1), 0);
}

SymbolSpace bpsk() { return enumerate_vectors(parse_constellation("bpsk"), 1); }

RVector random_interior(std::mt19937_64& rng, int n) {
  // Uniform on {λ > 0, Σλ < n}: n + 1 exponential spacings, keep the first n.
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> e(n + 1);
  double s = 0;
  for (auto& v : e) s += (v = ex(rng));
  RVector l(n);
  for (int i = 0; i < n; ++i) l(i) = n * e[i] / s;
  return l;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

std::string convergence_csv(const ConvergenceResult& r) {
  std::ostringstream os;
  write_convergence_csv(os, r);
  return os.str();
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  write_sweep_csv(os, r);
  return os.str();
}

const OptimizerReport& run_of(const ConvergenceResult& r, const std::string& method) {
  for (const auto& run : r.runs)
    if (run.method == method) return run;
  throw std::logic_error("missing run " + method);
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance_artifacts";
  std::filesystem::create_directories(out);
  const auto space = bpsk();
  const auto ch = ref_channel();

  // ---- 1, 2: reference channel and saturation ------------------------------------------
  const auto t_conv = std::chrono::steady_clock::now();
  const auto conv_cfg = convergence_preset();  // N = 1e5 reported
  const auto conv = run_convergence(conv_cfg);
  const double conv_time = seconds_since(t_conv);
  const std::string conv_text = convergence_csv(conv);
  write_file(out / "convergence.csv", conv_text);
  write_file(out / "convergence.json", to_json(conv).dump(2));

  const auto& two = run_of(conv, kTwoStep);
  const auto& grad = run_of(conv, kGradient);
  const auto two_oracle = mutual_information_oracle(ch.H, two.final->matrix(), space, 100000, 11);
  const auto grad_oracle = mutual_information_oracle(ch.H, grad.final->matrix(), space, 100000, 12);
  report("1a", two_oracle.bits_per_use >= 0.80 && two_oracle.bits_per_use <= 0.90,
         fmt("reference channel two-step final MI %.4f +/- %.4f in [0.80, 0.90] (independent N=1e5; report batch %.4f; %d rounds)",
             two_oracle.bits_per_use, two_oracle.std_err, two.final_mi.bits_per_use, two.rounds));
  report("1b", grad_oracle.bits_per_use >= 0.48 && grad_oracle.bits_per_use <= 0.60,
         fmt("reference channel direct gradient (identity start) final MI %.4f +/- %.4f in [0.48, 0.60] (%d iterations)",
             grad_oracle.bits_per_use, grad_oracle.std_err, grad.iterations));
  report("1c", conv_time <= 300.0, fmt("reference channel runtime %.1f s <= 300 s", conv_time));

  {
    int checked = 0, bad = 0;
    double worst = -INFINITY;
    auto check = [&](double v, double se) {
      ++checked;
      worst = std::max(worst, v - 1.0 - 3 * se);
      if (v > 1.0 + 3 * se) ++bad;
    };
    for (const auto& run : conv.runs) {
      for (const auto& e : run.mi_trace) check(e.bits_per_use, e.std_err);
      check(run.initial_mi.bits_per_use, run.initial_mi.std_err);
      check(run.final_mi.bits_per_use, run.final_mi.std_err);
    }
    check(two_oracle.bits_per_use, two_oracle.std_err);
    check(grad_oracle.bits_per_use, grad_oracle.std_err);
    report("2a", bad == 0, fmt("%d reference-channel MI estimates, %d above 1 + 3 se (max excess %.3g)", checked, bad, worst));

    auto hi_cfg = convergence_preset();
    hi_cfg.snr_db = 30;
    hi_cfg.snr_grid = {30};
    const auto hi_ch = ref_channel(30.0);
    const auto hi = optimize_two_step(hi_ch, space, effective_optimizer(hi_cfg), hi_cfg.seed);
    const auto hi_o = mutual_information_oracle(hi_ch.H, hi.final->matrix(), space, 100000, 13);
    report("2b", hi_o.bits_per_use >= 0.98, fmt("30 dB two-step MI %.4f >= 0.98", hi_o.bits_per_use));
  }

  // ---- 3: QPSK sweep gaps ---------------------------------------------------------------------
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sw = run_sweep(sweep_preset());
    const double dt = seconds_since(t0);
    write_file(out / "sweep.csv", sweep_csv(sw));
    write_file(out / "sweep.json", to_json(sw).dump(2));
    const double target = 4.0 / 3.0;
    const auto s_two = snr_at_level(sweep_curve(sw, kTwoStep), target);
    const auto s_np = snr_at_level(sweep_curve(sw, kNoPrecoding), target);
    const auto s_wf = snr_at_level(sweep_curve(sw, kWaterfilling), target);
    const bool have = s_two && s_np && s_wf;
    const double g_np = have ? *s_np - *s_two : NAN;
    const double g_wf = have ? *s_wf - *s_two : NAN;
    report("3a", have && std::abs(g_np - 4.0) <= 1.5,
           fmt("QPSK gap at 4/3 bits/use, no-precoding - two-step = %.2f dB (4 +/- 1.5); two-step reaches it at %.2f dB",
               g_np, have ? *s_two : NAN));
    report("3b", have && std::abs(g_wf - 10.0) <= 3.0,
           fmt("QPSK gap at 4/3 bits/use, gaussian-waterfilling - two-step = %.2f dB (10 +/- 3)", g_wf));
    report("3c", dt <= 1800.0, fmt("sweep runtime %.1f s <= 1800 s (31 points, N=2e4)", dt));

    int dominated = 0, above = 0;
    const auto ts = sweep_curve(sw, kTwoStep);
    const auto np = sweep_curve(sw, kNoPrecoding);
    std::vector<double> se_ts, se_np;
    for (const auto& r : sw.rows) {
      if (r.method == kTwoStep) se_ts.push_back(r.std_err);
      if (r.method == kNoPrecoding) se_np.push_back(r.std_err);
      if (r.method == kWaterfilling && r.bits_per_use > 2.0 + 3 * r.std_err) ++above;
    }
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (ts[i].second < np[i].second - 2 * (se_ts[i] + se_np[i])) ++dominated;
    report("3d", dominated == 0 && above == 0,
           fmt("two-step below no-precoding by > 2 se at %d of %zu points; waterfilling above log2 M at %d", dominated,
               ts.size(), above));
  }

  // ---- 4: gradients -----------------------------------------------------------------------
  {
    const auto noise = NoiseBatch::generate(2, 10000, 404);
    std::mt19937_64 rng(4);
    auto mi_at = [&](const RVector& l, const UnitaryPoint& v) {
      return mutual_information(ch.H, materialize(ch.right_singular(), l, v.matrix()), space, noise).block_nats;
    };
    double worst_j = 0, worst_j_comp = 0, worst_b = 0;
    for (int k = 0; k < 10; ++k) {
      const RVector l = random_interior(rng, 2);
      const UnitaryPoint v(oracle::random_unitary(2, rng));
      const auto e = mmse_matrix(ch.H, materialize(ch.right_singular(), l, v.matrix()), space, noise);
      const double t = std::pow(10.0, k % 3);
      const RVector j = power_jacobian(ch.sigma(), v, e);
      const RVector bg = barrier_gradient(l, t, ch.sigma(), v, e);
      RVector fd_j(2), fd_b(2);
      for (int i = 0; i < 2; ++i) {
        const double h = 1e-5 * std::min(1.0, std::min(l.minCoeff(), 2.0 - l.sum()));
        RVector a = l, b = l;
        a(i) += h;
        b(i) -= h;
        fd_j(i) = (mi_at(a, v) - mi_at(b, v)) / (2 * h);
        auto f = [&](const RVector& x) { return barrier_objective(x, t, [&](const RVector& y) { return mi_at(y, v); }); };
        fd_b(i) = (f(a) - f(b)) / (2 * h);
      }
      worst_j = std::max(worst_j, (j - fd_j).norm() / fd_j.norm());
      worst_j_comp = std::max(worst_j_comp, ((j - fd_j).array() / fd_j.array()).abs().maxCoeff());
      worst_b = std::max(worst_b, (bg - fd_b).norm() / fd_b.norm());
    }
    report("4a", worst_j <= 1e-2,
           fmt("power_jacobian vs central FD, max ||J - FD|| / ||FD|| = %.4f <= 1e-2 over 10 points (N=1e4; max "
               "per-component %.4f)",
               worst_j, worst_j_comp));
    report("4b", worst_b <= 1e-2,
           fmt("barrier_gradient vs central FD, max relative error %.2e <= 1e-2 over 10 points (t = 1, 10, 100)",
               worst_b));

    double worst_s = 0;
    const RVector lambda = RVector::Ones(2);
    for (int k = 0; k < 10; ++k) {
      const UnitaryPoint v(oracle::random_unitary(2, rng));
      const auto e = mmse_matrix(ch.H, materialize(ch.right_singular(), lambda, v.matrix()), space, noise);
      const CMatrix g = stiefel_gradient(ch.sigma(), lambda, v, e).D;
      auto obj = [&](const CMatrix& w) { return -mi_at(lambda, project_to_stiefel(w)); };
      const double h = 1e-4;
      const CMatrix d = -g;
      const double fd = (obj(v.matrix() + h * d) - obj(v.matrix() - h * d)) / (2 * h);
      const double an = real_inner(g, d);
      worst_s = std::max(worst_s, std::abs(fd - an) / std::abs(an));
    }
    report("4c", worst_s <= 2e-2,
           fmt("stiefel_gradient vs projected directional FD along -grad, max relative error %.4f <= 2e-2 over 10 "
               "points (N=1e4)",
               worst_s));
  }

  // ---- 5: concavity -----------------------------------------------------------------------
  {
    const auto noise = NoiseBatch::generate(2, 10000, 505);
    std::mt19937_64 rng(5);
    int fails = 0;
    double worst = -INFINITY;
    for (int k = 0; k < 50; ++k) {
      const UnitaryPoint v = k % 2 ? UnitaryPoint(oracle::random_unitary(2, rng)) : UnitaryPoint::identity(2);
      const RVector a = random_interior(rng, 2), b = random_interior(rng, 2);
      auto est = [&](const RVector& l) {
        return mutual_information(ch.H, materialize(ch.right_singular(), l, v.matrix()), space, noise);
      };
      const auto ia = est(a), ib = est(b), im = est(0.5 * (a + b));
      const double slack = 3 * (im.std_err + 0.5 * (ia.std_err + ib.std_err));
      const double gap = 0.5 * (ia.bits_per_use + ib.bits_per_use) - im.bits_per_use;
      worst = std::max(worst, gap / slack);
      if (gap > slack) ++fails;
    }
    report("5", fails == 0, fmt("concavity midpoint test, %d of 50 pairs beyond 3 se (worst gap %.3f of slack)", fails,
                                worst));
  }

  // ---- 6: MMSE sandwich -------------------------------------------------------------------
  {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> snr(-10, 30);
    double worst_lo = INFINITY, worst_hi = -INFINITY, worst_herm = 0;
    bool ok = true;
    for (int k = 0; k < 20; ++k) {
      const auto sp = enumerate_vectors(parse_constellation(k % 2 ? "qpsk" : "bpsk"), 1);
      const CMatrix h = oracle::random_matrix(2, 2, rng) * std::pow(10.0, snr(rng) / 20);
      const CMatrix p = materialize(oracle::random_unitary(2, rng), random_interior(rng, 2), oracle::random_unitary(2, rng));
      const std::size_t n = 2000;
      const auto e = mmse_matrix(h, p, sp, NoiseBatch::generate(2, n, 600 + k));
      Eigen::SelfAdjointEigenSolver<CMatrix> eig(e.E);
      const double d = 5 / std::sqrt(double(n));
      worst_lo = std::min(worst_lo, eig.eigenvalues().minCoeff());
      worst_hi = std::max(worst_hi, eig.eigenvalues().maxCoeff());
      worst_herm = std::max(worst_herm, (e.E - e.E.adjoint()).norm());
      ok = ok && eig.eigenvalues().minCoeff() >= -d && eig.eigenvalues().maxCoeff() <= 1 + d &&
           (e.E - e.E.adjoint()).norm() <= 1e-10;
    }
    report("6", ok, fmt("MMSE eigenvalues in [%.4f, %.4f] within [-5/sqrt(N), 1 + 5/sqrt(N)], Hermitian residual %.1e "
                        "(20 instances, N=2000)",
                        worst_lo, worst_hi, worst_herm));
  }

  // ---- 7: unitary invariance --------------------------------------------------------------
  {
    std::mt19937_64 rng(7);
    const auto noise = NoiseBatch::generate(2, 10000, 707);
    double worst = 0;
    for (int k = 0; k < 10; ++k) {
      const CMatrix p = materialize(oracle::random_unitary(2, rng), random_interior(rng, 2), oracle::random_unitary(2, rng));
      worst = std::max(worst, unitary_invariance_check(ch.H, p, space, noise, oracle::random_unitary(2, rng)));
    }
    report("7a", worst <= 1e-10, fmt("output-rotation delta max %.2e <= 1e-10 over 10 unitaries", worst));

    const auto big = NoiseBatch::generate(2, 100000, 708);
    const auto base = mutual_information(ch.H, CMatrix::Identity(2, 2), space, big);
    double best_z = 0;
    for (int k = 0; k < 10; ++k) {
      const auto rot = mutual_information(ch.H, oracle::random_unitary(2, rng), space, big);
      best_z = std::max(best_z, std::abs(rot.bits_per_use - base.bits_per_use) / (rot.std_err + base.std_err));
    }
    report("7b", best_z > 3, fmt("input rotation changes MI by %.1f combined se (> 3) on the reference channel", best_z));
  }

  // ---- 8: projection optimality -----------------------------------------------------------
  {
    std::mt19937_64 rng(8);
    int violations = 0;
    double idem = 0;
    for (int k = 0; k < 20; ++k) {
      const CMatrix w = oracle::random_matrix(4, 4, rng);
      const CMatrix q = project_to_stiefel(w).matrix();
      const double best = (w - q).norm();
      idem = std::max(idem, (project_to_stiefel(q).matrix() - q).norm());
      for (int s = 0; s < 1000; ++s)
        if ((w - oracle::random_unitary(4, rng)).norm() < best - 1e-12) ++violations;
    }
    report("8", violations == 0 && idem <= 1e-10,
           fmt("projection beaten by %d of 20000 sampled unitaries; idempotence %.1e <= 1e-10", violations, idem));
  }

  // ---- 9: monotone trace ------------------------------------------------------------------
  {
    int bad = 0, transitions = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto cfg = convergence_preset();
      cfg.samples = 20000;
      const auto rep = optimize_two_step(ch, space, effective_optimizer(cfg), seed);
      for (std::size_t i = 1; i < rep.mi_trace.size(); ++i) {
        const auto& a = rep.mi_trace[i - 1];
        const auto& b = rep.mi_trace[i];
        if (a.phase == b.phase) continue;
        ++transitions;
        if (b.bits_per_use < a.bits_per_use - 2 * (a.std_err + b.std_err)) ++bad;
      }
    }
    report("9", bad == 0 && transitions > 0,
           fmt("two-step trace drops > 2 se at %d of %d phase transitions over 5 seeds", bad, transitions));
  }

  // ---- 10: determinism --------------------------------------------------------------------
  {
    const bool same_conv = convergence_csv(run_convergence(conv_cfg)) == conv_text;
    auto sc = sweep_preset();
    sc.snr_grid = {0, 6, 12};
    const auto a = sweep_csv(run_sweep(sc));
    sc.workers = 3;
    const auto b = sweep_csv(run_sweep(sc));
    report("10", same_conv && a == b,
           fmt("repeated runs byte-identical: convergence CSV %s, sweep CSV (1 vs 3 workers) %s",
               same_conv ? "yes" : "no", a == b ? "yes" : "no"));
  }

  std::printf("%s: %d criterion line(s) failed\n", failures ? "FAILED" : "PASSED", failures);
  return failures ? 1 : 0;
}
