#include "spikeguard/surrogate.hpp"

#include <cmath>

#include "spikeguard/error.hpp"

namespace spikeguard {

SurrogateFamily parse_surrogate_family(const std::string& name) {
  if (name == "triangle") return SurrogateFamily::Triangle;
  if (name == "rectangular") return SurrogateFamily::Rectangular;
  if (name == "sigmoid") return SurrogateFamily::Sigmoid;
  if (name == "superspike") return SurrogateFamily::Superspike;
  fail(ErrorCode::InvalidArgument, "unknown surrogate family '" + name + "'");
}

std::string to_string(SurrogateFamily family) {
  switch (family) {
    case SurrogateFamily::Triangle: return "triangle";
    case SurrogateFamily::Rectangular: return "rectangular";
    case SurrogateFamily::Sigmoid: return "sigmoid";
    case SurrogateFamily::Superspike: return "superspike";
  }
  fail(ErrorCode::InvalidArgument, "unknown surrogate family");
}

void SurrogateSpec::validate() const {
  require(gamma > 0.0 && std::isfinite(gamma), "surrogate gamma must be > 0");
}

double SurrogateSpec::operator()(double u) const {
  switch (family) {
    case SurrogateFamily::Triangle: {
      const double d = gamma - std::abs(u);
      return d > 0.0 ? d / (gamma * gamma) : 0.0;
    }
    case SurrogateFamily::Rectangular:
      return std::abs(u) <= gamma ? 0.5 / gamma : 0.0;
    case SurrogateFamily::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-u / gamma));
      return s * (1.0 - s) / gamma;
    }
    case SurrogateFamily::Superspike: {
      const double d = 1.0 + std::abs(u) / gamma;
      return 1.0 / (d * d);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown surrogate family");
}

double SurrogateSpec::window() const {
  switch (family) {
    case SurrogateFamily::Triangle:
    case SurrogateFamily::Rectangular:
      return gamma;
    case SurrogateFamily::Sigmoid: {
      // 4 s (1 - s) = 0.01
      const double r = std::sqrt(0.99);
      return gamma * std::log((1.0 + r) / (1.0 - r));
    }
    case SurrogateFamily::Superspike:
      return 9.0 * gamma;  // (1 + u/g)^-2 = 0.01
  }
  fail(ErrorCode::InvalidArgument, "unknown surrogate family");
}

Tensor surrogate_grad(const SurrogateSpec& spec, const Tensor& u_bar) {
  spec.validate();
  Tensor out(u_bar.shape());
  for (std::size_t i = 0; i < u_bar.size(); ++i) out[i] = spec(u_bar[i]);
  return out;
}

}  // namespace spikeguard
