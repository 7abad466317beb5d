// Dual-hop amplify-and-forward relay link: relay gain, destination normalization and the
// 2L × 2L effective block channel seen by the precoded source vector.
#pragma once

#include "relayprec/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayprec {

struct RelayLink {
  cdouble h;  // source -> relay
  cdouble g;  // relay -> destination
};

struct RelayNetworkParams {
  cdouble h0;  // source -> destination
  std::vector<RelayLink> relays;
  double ps = 1.0;  // source power per symbol
  double pr = 1.0;  // relay power budget
  int block_length = 1;

  void validate() const {
    if (!(std::isfinite(ps) && ps > 0)) throw std::invalid_argument("Ps must be finite and > 0");
    if (!(std::isfinite(pr) && pr >= 0)) throw std::invalid_argument("Pr must be finite and >= 0");
    if (relays.empty()) throw std::invalid_argument("at least one relay is required");
    if (block_length < 1) throw std::invalid_argument("block length L must be >= 1");
  }

  /// Equal source/relay power with unit noise: Ps = Pr = 10^{snr_db/10}.
  static RelayNetworkParams at_snr(cdouble h0, std::vector<RelayLink> relays, double snr_db, int block_length = 1) {
    const double p = std::pow(10.0, snr_db / 10.0);
    return {h0, std::move(relays), p, p, block_length};
  }
};

struct EffectiveChannel {
  std::size_t selected_relay = 0;
  double b = 0;    // relay amplification
  double n_d = 1;  // effective noise power of the second slot
  double w = 1;    // 1/√N_d
  CMatrix H;       // 2L × 2L
  Svd svd;         // H = U·Diag(sigma)·Vᴴ

  int dim() const { return static_cast<int>(H.rows()); }
  const RVector& sigma() const { return svd.sigma; }
  const CMatrix& right_singular() const { return svd.V; }
};

namespace detail {
inline void check_relay_index(const RelayNetworkParams& p, std::size_t relay) {
  if (relay >= p.relays.size())
    throw std::out_of_range("relay index " + std::to_string(relay) + " out of range (have " +
                            std::to_string(p.relays.size()) + ")");
}
}  // namespace detail

/// b = √(L·Pr / Tr E[y_i y_iᴴ]) with E[s_a s_aᴴ] = I, i.e. √(Pr / (Ps|h_i|² + 1)).
inline double amplification_factor(const RelayNetworkParams& p, std::size_t relay) {
  detail::check_relay_index(p, relay);
  return std::sqrt(p.pr / (p.ps * std::norm(p.relays[relay].h) + 1.0));
}

inline EffectiveChannel effective_channel(const RelayNetworkParams& p, std::size_t relay) {
  p.validate();
  detail::check_relay_index(p, relay);
  const auto& link = p.relays[relay];
  const Eigen::Index l = p.block_length;

  EffectiveChannel ch;
  ch.selected_relay = relay;
  ch.b = amplification_factor(p, relay);
  ch.n_d = 1.0 + ch.b * ch.b * std::norm(link.g);
  ch.w = 1.0 / std::sqrt(ch.n_d);

  const double amp = std::sqrt(p.ps);
  const CMatrix id = CMatrix::Identity(l, l);
  ch.H = CMatrix::Zero(2 * l, 2 * l);
  ch.H.topLeftCorner(l, l) = amp * p.h0 * id;
  ch.H.bottomLeftCorner(l, l) = amp * ch.w * ch.b * link.h * link.g * id;
  ch.H.bottomRightCorner(l, l) = amp * ch.w * p.h0 * id;
  if (!ch.H.allFinite()) throw numerical_error("effective channel has non-finite entries");

  ch.svd = svd(ch.H);
  const CMatrix rebuilt = ch.svd.U * ch.svd.sigma.cast<cdouble>().asDiagonal() * ch.svd.V.adjoint();
  const double scale = std::max(ch.H.norm(), 1e-300);
  if ((rebuilt - ch.H).norm() / scale > 1e-10) {
    throw numerical_error("effective channel SVD does not reconstruct H (cond ~ " +
                          std::to_string(ch.svd.sigma(0) / std::max(ch.svd.sigma(ch.svd.sigma.size() - 1), 1e-300)) +
                          ")");
  }
  return ch;
}

/// log2 det(I + HᴴH), the Gaussian-input capacity of one block.
inline double gaussian_capacity_bits(const CMatrix& h) {
  const CMatrix g = CMatrix::Identity(h.cols(), h.cols()) + h.adjoint() * h;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(g, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().array().log().sum() / kLn2;
}

/// Relay maximizing the Gaussian-input capacity proxy; lowest index wins ties.
inline std::size_t select_relay(const RelayNetworkParams& p) {
  p.validate();
  std::size_t best = 0;
  double best_cap = -INFINITY;
  for (std::size_t i = 0; i < p.relays.size(); ++i) {
    const double cap = gaussian_capacity_bits(effective_channel(p, i).H);
    if (cap > best_cap) {
      best_cap = cap;
      best = i;
    }
  }
  return best;
}

}  // namespace relayprec
