#pragma once

#include <string>

#include "spikeguard/rng.hpp"
#include "spikeguard/tensor.hpp"

namespace spikeguard {

enum class Encoding { Direct, Poisson };

Encoding parse_encoding(const std::string& name);
std::string to_string(Encoding encoding);

/// [B, ...] -> [T, B, ...], every time slice a copy of x.
Tensor encode_direct(const Tensor& x, std::size_t timesteps);
/// [B, ...] in [0, 1] -> [T, B, ...] of Bernoulli(x) spikes; slice t draws
/// from substream (Poisson, t).
Tensor encode_poisson(const Rng& rng, const Tensor& x, std::size_t timesteps);

}  // namespace spikeguard
