#include "support.hpp"

#include <gtest/gtest.h>

using namespace relayprec;
using testing_support::ref_params;

TEST(Amplification, NoiseOnlyForwardingGivesRootP) {
  const RelayNetworkParams p{{0.4, 0}, {{{0, 0}, {1, 0}}}, 5.0, 5.0, 1};
  EXPECT_NEAR(amplification_factor(p, 0), std::sqrt(5.0), 1e-15);
}

TEST(Amplification, ReferenceValue) {
  const auto p = ref_params();
  const double want = oracle::amplification(p.ps, p.pr, {1.2, 0});
  EXPECT_NEAR(amplification_factor(p, 0), want, 1e-15);
  // Scalar evaluation at Ps = Pr = 10^0.3.
  EXPECT_NEAR(amplification_factor(p, 0), 0.717739, 1e-6);
}

TEST(Amplification, SilentRelay) {
  const RelayNetworkParams p{{0.4, 0}, {{{1.2, 0}, {0, -0.9}}}, 2.0, 0.0, 1};
  EXPECT_EQ(amplification_factor(p, 0), 0.0);
  const auto ch = effective_channel(p, 0);
  EXPECT_EQ(ch.w, 1.0);
  EXPECT_EQ(ch.H(1, 0), cdouble(0, 0));
}

TEST(Amplification, BadIndex) { EXPECT_THROW(amplification_factor(ref_params(), 1), std::out_of_range); }

TEST(EffectiveChannel, ReferenceEntries) {
  const auto p = ref_params();
  const auto ch = effective_channel(p, 0);
  const auto want = oracle::channel_2x2({0.4, 0}, {1.2, 0}, {0, -0.9}, p.ps, p.pr);
  EXPECT_LT((ch.H - want).norm(), 1e-14);
  EXPECT_EQ(ch.H(0, 1), cdouble(0, 0));
  const double b = ch.b;
  EXPECT_NEAR(ch.n_d, 1 + b * b * 0.81, 1e-14);
  EXPECT_NEAR(ch.w, 1 / std::sqrt(ch.n_d), 1e-15);
  EXPECT_GT(ch.w, 0);
  EXPECT_LE(ch.w, 1);
  // lower-left is √Ps·w·b·(−1.08j): purely imaginary
  EXPECT_NEAR(ch.H(1, 0).real(), 0, 1e-15);
  EXPECT_NEAR(ch.H(1, 0).imag(), -1.08 * std::sqrt(p.ps) * ch.w * b, 1e-14);
}

TEST(EffectiveChannel, SvdRoundTripAndOrdering) {
  for (double snr : {-10.0, 0.0, 3.0, 20.0, 40.0}) {
    for (int l : {1, 2, 3}) {
      auto p = ref_params(snr);
      p.block_length = l;
      const auto ch = effective_channel(p, 0);
      ASSERT_EQ(ch.dim(), 2 * l);
      const CMatrix rebuilt = ch.svd.U * ch.sigma().cast<cdouble>().asDiagonal() * ch.svd.V.adjoint();
      EXPECT_LT((rebuilt - ch.H).norm() / ch.H.norm(), 1e-10);
      for (Eigen::Index i = 1; i < ch.sigma().size(); ++i) EXPECT_GE(ch.sigma()(i - 1), ch.sigma()(i));
      EXPECT_GT(ch.sigma().minCoeff(), 0.0);
      EXPECT_TRUE(is_unitary(ch.svd.U, 1e-10));
      EXPECT_TRUE(is_unitary(ch.svd.V, 1e-10));
    }
  }
}

TEST(EffectiveChannel, BlockStructureForLongerBlocks) {
  auto p = ref_params();
  p.block_length = 2;
  const auto ch = effective_channel(p, 0);
  const auto ref = oracle::channel_2x2({0.4, 0}, {1.2, 0}, {0, -0.9}, p.ps, p.pr);
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          EXPECT_NEAR(std::abs(ch.H(2 * bi + i, 2 * bj + j) - (i == j ? ref(bi, bj) : cdouble(0))), 0, 1e-14);
}

TEST(EffectiveChannel, DeadRelayIsDirectLinkOnly) {
  for (RelayLink link : {RelayLink{{0, 0}, {0.7, 0.1}}, RelayLink{{1.2, 0}, {0, 0}}}) {
    RelayNetworkParams p{{0.4, 0.3}, {link}, 3.0, 3.0, 1};
    const auto ch = effective_channel(p, 0);
    EXPECT_EQ(ch.H(1, 0), cdouble(0, 0));
    EXPECT_EQ(ch.H(0, 1), cdouble(0, 0));
    const double a = std::sqrt(3.0) * std::abs(p.h0);
    RVector want(2);
    want << a, a * ch.w;
    EXPECT_LT((ch.sigma() - want).norm(), 1e-12);
  }
}

TEST(EffectiveChannel, ZeroDirectLinkIsRankDeficient) {
  RelayNetworkParams p{{0, 0}, {{{1.2, 0}, {0, -0.9}}}, 2.0, 2.0, 1};
  const auto ch = effective_channel(p, 0);
  EXPECT_LT(ch.sigma()(1), 1e-12);
  EXPECT_GT(ch.sigma()(0), 0.1);
}

TEST(EffectiveChannel, FiniteForExtremePowers) {
  for (double ps : {1e-8, 1.0, 1e8})
    for (double pr : {1e-8, 1.0, 1e8}) {
      RelayNetworkParams p{{0.4, 0}, {{{1.2, 0}, {0, -0.9}}}, ps, pr, 1};
      EXPECT_TRUE(effective_channel(p, 0).H.allFinite());
    }
}

TEST(EffectiveChannel, ValidationErrors) {
  RelayNetworkParams p = ref_params();
  p.ps = 0;
  EXPECT_THROW(effective_channel(p, 0), std::invalid_argument);
  p = ref_params();
  p.pr = -1;
  EXPECT_THROW(effective_channel(p, 0), std::invalid_argument);
  p = ref_params();
  p.relays.clear();
  EXPECT_THROW(effective_channel(p, 0), std::invalid_argument);
  p = ref_params();
  p.block_length = 0;
  EXPECT_THROW(effective_channel(p, 0), std::invalid_argument);
  p = ref_params();
  p.ps = std::numeric_limits<double>::infinity();
  EXPECT_THROW(effective_channel(p, 0), std::invalid_argument);
}

TEST(SelectRelay, SingleRelay) { EXPECT_EQ(select_relay(ref_params()), 0u); }

TEST(SelectRelay, DegenerateCompetitorLoses) {
  auto p = ref_params();
  p.relays.insert(p.relays.begin(), RelayLink{{0, 0}, {0, 0}});
  EXPECT_EQ(select_relay(p), 1u);
}

TEST(SelectRelay, MatchesLogDetOracle) {
  auto p = ref_params();
  p.relays.push_back({{0.1, 0}, {0.1, 0}});
  const double c0 = oracle::logdet2(oracle::channel_2x2(p.h0, p.relays[0].h, p.relays[0].g, p.ps, p.pr));
  const double c1 = oracle::logdet2(oracle::channel_2x2(p.h0, p.relays[1].h, p.relays[1].g, p.ps, p.pr));
  ASSERT_GT(c0, c1);
  EXPECT_EQ(select_relay(p), 0u);
  EXPECT_NEAR(gaussian_capacity_bits(effective_channel(p, 0).H), c0, 1e-12);
  EXPECT_NEAR(gaussian_capacity_bits(effective_channel(p, 1).H), c1, 1e-12);
}

TEST(SelectRelay, TiesGoToLowestIndex) {
  auto p = ref_params();
  p.relays.push_back(p.relays[0]);
  p.relays.push_back(p.relays[0]);
  EXPECT_EQ(select_relay(p), 0u);
}
