#pragma once

#include <cstdint>

#include "spikeguard/tensor.hpp"

namespace spikeguard {

/// Tags for substream derivation. Values are part of the reproducibility
/// contract: changing one changes every stream derived from it.
enum class Stream : std::uint64_t {
  Init = 1,
  Shuffle = 2,
  Poisson = 3,
  PgdStart = 4,
  Noise = 5,
  MonteCarlo = 6,
  Probe = 7,
  Dataset = 8,
  Attack = 9,
};

/// Counter-based generator. Output i is the SplitMix64 finalizer applied to
/// key + (i + 1) * golden_gamma, so the whole state is (key, counter) and any
/// position of the stream can be computed independently. Substreams hash a
/// (purpose, a, b) tuple into a fresh key.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x5851F42D4C957F2DULL)) {}
  static Rng from_state(std::uint64_t key, std::uint64_t counter) {
    Rng r(0);
    r.key_ = key;
    r.counter_ = counter;
    return r;
  }

  Rng substream(Stream purpose, std::uint64_t a = 0, std::uint64_t b = 0) const;

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; consumes exactly two outputs.
  double normal();
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

Tensor gaussian(Rng& rng, const Shape& shape, double mean, double std);
Tensor uniform(Rng& rng, const Shape& shape, double lo, double hi);

}  // namespace spikeguard
