#include "spikeguard/rng.hpp"

#include <cmath>
#include <numbers>

#include "spikeguard/error.hpp"

namespace spikeguard {

Rng Rng::substream(Stream purpose, std::uint64_t a, std::uint64_t b) const {
  std::uint64_t k = mix(key_ ^ mix(static_cast<std::uint64_t>(purpose) + 0x632BE59BD9B4E019ULL));
  k = mix(k ^ mix(a + 0x8CB92BA72F3D8DD7ULL));
  k = mix(k ^ mix(b + 0xD6E8FEB86659FD93ULL));
  return from_state(k, 0);
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, "Rng::below needs n > 0");
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

Tensor gaussian(Rng& rng, const Shape& shape, double mean, double std) {
  require(std >= 0.0, "gaussian: std must be >= 0");
  Tensor t(shape);
  for (auto& v : t.data()) v = mean + std * rng.normal();
  return t;
}

Tensor uniform(Rng& rng, const Shape& shape, double lo, double hi) {
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace spikeguard
