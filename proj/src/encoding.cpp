#include "spikeguard/encoding.hpp"

#include <algorithm>

#include "spikeguard/error.hpp"

namespace spikeguard {

Encoding parse_encoding(const std::string& name) {
  if (name == "direct") return Encoding::Direct;
  if (name == "poisson") return Encoding::Poisson;
  fail(ErrorCode::InvalidArgument, "unknown encoding '" + name + "'");
}

std::string to_string(Encoding encoding) { return encoding == Encoding::Direct ? "direct" : "poisson"; }

namespace {

Shape time_major(const Tensor& x, std::size_t timesteps) {
  Shape s{timesteps};
  s.insert(s.end(), x.shape().begin(), x.shape().end());
  return s;
}

}  // namespace

Tensor encode_direct(const Tensor& x, std::size_t timesteps) {
  require(timesteps >= 1, "encode_direct: T must be >= 1");
  Tensor out(time_major(x, timesteps));
  for (std::size_t t = 0; t < timesteps; ++t)
    std::copy(x.data().begin(), x.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(t * x.size()));
  return out;
}

Tensor encode_poisson(const Rng& rng, const Tensor& x, std::size_t timesteps) {
  require(timesteps >= 1, "encode_poisson: T must be >= 1");
  for (double v : x.data()) require(v >= 0.0 && v <= 1.0, "encode_poisson: inputs must lie in [0, 1]");
  Tensor out(time_major(x, timesteps));
  for (std::size_t t = 0; t < timesteps; ++t) {
    Rng r = rng.substream(Stream::Poisson, t);
    for (std::size_t i = 0; i < x.size(); ++i) out[t * x.size() + i] = r.uniform() < x[i] ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace spikeguard
