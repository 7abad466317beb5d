#pragma once

#include "oracles.hpp"
#include "relayprec/channel.hpp"
#include "relayprec/constellation.hpp"
#include "relayprec/noise.hpp"

#include <vector>

namespace testing_support {

using namespace relayprec;

/// Batch samples as rows, for the oracle functions.
inline std::vector<std::vector<oracle::cd>> rows_of(const NoiseBatch& b) {
  std::vector<std::vector<oracle::cd>> out(b.size(), std::vector<oracle::cd>(b.dim()));
  for (std::size_t j = 0; j < b.size(); ++j)
    for (int i = 0; i < b.dim(); ++i) out[j][i] = b.samples()(i, static_cast<Eigen::Index>(j));
  return out;
}

inline RelayNetworkParams ref_params(double snr_db = 3.0) {
  return RelayNetworkParams::at_snr({0.4, 0.0}, {{{1.2, 0.0}, {0.0, -0.9}}}, snr_db, 1);
}

inline EffectiveChannel ref_channel(double snr_db = 3.0) { return effective_channel(ref_params(snr_db), 0); }

inline SymbolSpace bpsk_space(int l = 1) { return enumerate_vectors(build_constellation(ConstellationKind::PSK, 2), l); }
inline SymbolSpace qpsk_space(int l = 1) { return enumerate_vectors(build_constellation(ConstellationKind::PSK, 4), l); }

}  // namespace testing_support
