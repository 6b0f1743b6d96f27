#include "spikeguard/neuron.hpp"

#include <cmath>

#include "spikeguard/error.hpp"

namespace spikeguard {

ResetMode parse_reset_mode(const std::string& name) {
  if (name == "soft") return ResetMode::Soft;
  if (name == "hard") return ResetMode::Hard;
  fail(ErrorCode::InvalidArgument, "unknown reset mode '" + name + "'");
}

std::string to_string(ResetMode mode) { return mode == ResetMode::Soft ? "soft" : "hard"; }

void LifParams::validate() const {
  require(tau >= 0.0 && tau <= 1.0, "LIF tau must lie in [0, 1]");
  require(v_th > 0.0, "LIF threshold must be > 0");
}

LifLayerState LifLayerState::zeros(const Shape& shape) {
  LifLayerState s;
  s.u = Tensor(shape);
  s.spikes = Tensor(shape);
  return s;
}

Tensor LifLayerState::carried_potential(const LifParams& params) const {
  Tensor carried(u.shape());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double reset = params.reset == ResetMode::Soft ? spikes[i] * params.v_th : spikes[i] * u[i];
    carried[i] = params.tau * (u[i] - reset);
  }
  return carried;
}

Tensor lif_step(LifLayerState& state, const LifParams& params, const Tensor& current) {
  if (state.u.shape() != current.shape())
    fail(ErrorCode::ShapeMismatch, "lif_step: state " + shape_str(state.u.shape()) + " vs input " +
                                       shape_str(current.shape()));
  const double tau = params.tau, vth = params.v_th;
  const bool soft = params.reset == ResetMode::Soft;
  Tensor& u = state.u;
  Tensor& o = state.spikes;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double reset = soft ? o[i] * vth : o[i] * u[i];
    u[i] = tau * (u[i] - reset) + current[i];
    o[i] = u[i] - vth >= 0.0 ? 1.0 : 0.0;
  }
  if (state.record) {
    LifStepRecord rec{u, Tensor(u.shape()), o, Tensor(u.shape())};
    for (std::size_t i = 0; i < u.size(); ++i) {
      rec.u_bar[i] = u[i] - vth;
      rec.slope[i] = (*state.record)(rec.u_bar[i]);
    }
    state.trace.push_back(std::move(rec));
  }
  return o;
}

}  // namespace spikeguard
