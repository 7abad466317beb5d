// Doubling / halving step-size search shared by the power, rotation and direct-gradient loops.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

namespace relayprec {

struct LineSearchLimits {
  int max_doublings = 40;
  int max_halvings = 40;
};

struct LineSearchResult {
  double gamma = 0;
  double value = INFINITY;  // objective at the accepted step
  bool accepted = false;
  int evaluations = 0;
};

/// Minimizes along a search path from f0. `trial(γ)` returns {f(γ), predicted(γ)}, the objective
/// at the trial point and the first-order predicted decrease (γ‖Δ‖² for a straight line).
///
/// Starting at γ = 1:
///   while f0 − f(2γ) ≥ ½·predicted(2γ):  γ := 2γ
///   while f0 − f(γ)  < ½·predicted(γ):   γ := γ/2
/// Non-finite trial values fail both tests, so infeasible trials only ever shrink γ.
/// `accepted` is false when the halving limit is hit without meeting the sufficient-decrease test.
template <class Trial>
LineSearchResult doubling_halving_search(double f0, Trial&& trial, const LineSearchLimits& lim = {}) {
  std::vector<std::pair<double, std::pair<double, double>>> cache;
  LineSearchResult res;
  auto eval = [&](double g) {
    for (const auto& [key, val] : cache)
      if (key == g) return val;
    const auto val = trial(g);
    ++res.evaluations;
    cache.emplace_back(g, val);
    return val;
  };
  auto sufficient = [&](double g) {
    const auto [f, pred] = eval(g);
    return std::isfinite(f) && f0 - f >= 0.5 * pred;
  };

  double gamma = 1.0;
  for (int i = 0; i < lim.max_doublings && sufficient(2.0 * gamma); ++i) gamma *= 2.0;
  int halvings = 0;
  while (!sufficient(gamma)) {
    if (++halvings > lim.max_halvings) return res;
    gamma *= 0.5;
  }
  res.gamma = gamma;
  res.value = eval(gamma).first;
  res.accepted = true;
  return res;
}

}  // namespace relayprec
