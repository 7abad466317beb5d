// Optimize a BPSK precoder on a single-relay channel and compare with no precoding.
#include "relayprec/baselines.hpp"
#include "relayprec/two_step.hpp"

#include <cstdio>

int main() {
  using namespace relayprec;
  const auto net = RelayNetworkParams::at_snr({0.4, 0.0}, {{{1.2, 0.0}, {0.0, -0.9}}}, 3.0, 1);
  const auto ch = effective_channel(net, select_relay(net));
  const auto space = enumerate_vectors(build_constellation(ConstellationKind::PSK, 2), 1);

  OptimizerConfig cfg;
  cfg.report_samples = 20000;
  cfg.random_rotation_start = true;  // V = I is a stationary point of the rotation step
  const auto rep = optimize_two_step(ch, space, cfg, 7);

  const auto batch = NoiseBatch::generate(space.dim(), 20000, 11);
  const auto plain = mutual_information(ch.H, no_precoding(space.dim()).matrix(), space, batch);
  std::printf("no precoding: %.4f bits/use\n", plain.bits_per_use);
  std::printf("two-step:     %.4f +/- %.4f bits/use after %d rounds\n", rep.final_mi.bits_per_use,
              rep.final_mi.std_err, rep.rounds);
  std::printf("power allocation: %.4f %.4f\n", rep.final->lambda(0), rep.final->lambda(1));
}
