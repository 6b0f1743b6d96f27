#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spikeguard/surrogate.hpp"
#include "spikeguard/tensor.hpp"

namespace spikeguard {

enum class ResetMode { Soft, Hard };

ResetMode parse_reset_mode(const std::string& name);
std::string to_string(ResetMode mode);

struct LifParams {
  double tau = 1.0;
  double v_th = 1.0;
  ResetMode reset = ResetMode::Soft;

  void validate() const;
};

/// One recorded timestep: pre-spike potential, its shift, the spikes and the
/// surrogate slope at the shift.
struct LifStepRecord {
  Tensor u;
  Tensor u_bar;
  Tensor spikes;
  Tensor slope;
};

/// Membrane state of one layer. `u` is the pre-spike potential of the last
/// step and `spikes` its output, so the reset of step t is applied lazily at
/// step t + 1.
struct LifLayerState {
  Tensor u;
  Tensor spikes;
  std::vector<LifStepRecord> trace;
  std::optional<SurrogateSpec> record;  // set to keep per-step records

  static LifLayerState zeros(const Shape& shape);
  /// tau * (U(t) - R(t)): the potential the next input current is added to.
  Tensor carried_potential(const LifParams& params) const;
};

/// U(t) = tau (U(t-1) - R(t-1)) + I(t); O(t) = H(U(t) - v_th) with H(0) = 1.
/// Soft reset R = O v_th, hard reset R = O U.
Tensor lif_step(LifLayerState& state, const LifParams& params, const Tensor& current);

}  // namespace spikeguard
