#pragma once

#include <vector>

#include "spikeguard/network.hpp"
#include "spikeguard/rng.hpp"

namespace oracle {

struct Instance {
  spikeguard::Network net;
  spikeguard::Tensor x;
  std::vector<int> y;
};

// Small dense network with 1..3 hidden layers of 2..8 neurons, T in 1..4,
// random reset mode, surrogate family, decay and normalization. Weights are
// scaled up so that a healthy share of neurons fire.
inline Instance random_instance(spikeguard::Rng& rng) {
  using namespace spikeguard;
  ModelSpec spec;
  const std::size_t in = 2 + rng.below(4);
  spec.input_shape = {in};
  spec.hidden.clear();
  const std::size_t L = 1 + rng.below(3);
  for (std::size_t l = 0; l < L; ++l) spec.hidden.push_back({LayerKind::Dense, 2 + rng.below(7), rng.below(2) == 0});
  spec.classes = 2 + rng.below(3);
  spec.timesteps = 1 + rng.below(4);
  spec.lif.tau = rng.uniform(0.3, 1.0);
  spec.lif.v_th = rng.uniform(0.5, 1.5);
  spec.lif.reset = rng.below(2) == 0 ? ResetMode::Soft : ResetMode::Hard;
  const SurrogateFamily fams[] = {SurrogateFamily::Triangle, SurrogateFamily::Rectangular, SurrogateFamily::Sigmoid,
                                  SurrogateFamily::Superspike};
  spec.surrogate = {fams[rng.below(4)], rng.uniform(0.5, 2.0)};
  Instance inst{Network::init(spec, rng.next_u64()), {}, {}};
  for (std::size_t l = 0; l < L; ++l) {
    auto& w = inst.net.hidden(l).weight;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= 3.0;
    if (auto& bn = inst.net.hidden(l).bn) {
      for (std::size_t c = 0; c < bn->channels(); ++c) {
        bn->lambda[c] = rng.uniform(0.5, 1.5);
        bn->beta[c] = rng.uniform(-0.5, 1.0);
      }
    }
  }
  const std::size_t B = 2 + rng.below(3);
  inst.x = Tensor({B, in});
  for (std::size_t i = 0; i < inst.x.size(); ++i) inst.x[i] = rng.uniform();
  for (std::size_t b = 0; b < B; ++b) inst.y.push_back(static_cast<int>(rng.below(spec.classes)));
  return inst;
}

}  // namespace oracle
