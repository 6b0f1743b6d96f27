#pragma once

#include <string>

#include "spikeguard/tensor.hpp"

namespace spikeguard {

enum class SurrogateFamily { Triangle, Rectangular, Sigmoid, Superspike };

SurrogateFamily parse_surrogate_family(const std::string& name);
std::string to_string(SurrogateFamily family);

/// Surrogate derivative dO/dU as a function of the shifted potential u_bar = U - v_th.
///   triangle     (1/g^2) max(g - |u|, 0)
///   rectangular  (1/(2g)) [|u| <= g]
///   sigmoid      s(u/g)(1 - s(u/g)) / g
///   superspike   (1 + |u|/g)^-2
struct SurrogateSpec {
  SurrogateFamily family = SurrogateFamily::Triangle;
  double gamma = 1.0;

  void validate() const;
  double operator()(double u_bar) const;
  /// Half-width of the interval the regularizer treats as gradient-available.
  /// Triangle and rectangular: gamma. Sigmoid and superspike: where h drops
  /// to 1% of its peak.
  double window() const;
};

Tensor surrogate_grad(const SurrogateSpec& spec, const Tensor& u_bar);

}  // namespace spikeguard
