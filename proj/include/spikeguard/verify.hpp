#pragma once

#include <cstdint>

#include "spikeguard/config.hpp"
#include "spikeguard/mpd.hpp"

namespace spikeguard {

/// Every report carries a top-level boolean "pass" and the tolerances used.

/// Membrane-potential moments of a soft-reset LIF population for
/// tau in {1, 0.5}, T = 8, beta = 0, lambda alpha V_th = 1: the firing-free
/// variance against a 99% chi-square interval and the spiking mean against
/// the closed form with measured rates (5 standard errors).
json verify_theorem1(std::uint64_t seed, std::size_t trials = 100000);

/// Sampled sensitivity of a random 3-4-2 network (T = 2, no normalization)
/// against eps^2 max ||W_P||^2 over the cells reached, eps = 0.05.
json verify_theorem2(std::uint64_t seed, std::size_t directions = 10000, double epsilon = 0.05);

/// Overlap derivatives against central differences over the acceptance grid,
/// the error function against the C library, the reference overlap value and
/// the regularizer's chain rule to the potentials.
json verify_gradients(ErfFn erf_fn = nullptr);

}  // namespace spikeguard
