#pragma once

#include <string>
#include <vector>

#include "spikeguard/network.hpp"
#include "spikeguard/surrogate.hpp"
#include "spikeguard/tensor.hpp"

namespace spikeguard {

enum class Approx { Bptt, Bptr };

Approx parse_approx(const std::string& name);
std::string to_string(Approx approx);

/// Gradients in the order of Network::parameters(), plus input adjoints.
struct GradientBundle {
  std::vector<Tensor> params;
  Tensor encoded;  // dL/dO^0(t), [T, B, input...]; empty when not requested
  Tensor input;    // (1/T) sum_t dL/dO^0(t), [B, input...]

  bool all_finite() const;
};

struct BackwardOptions {
  bool input_gradient = true;
  /// Optional extra adjoints on the shifted potentials, one [T, B, ...] tensor
  /// per hidden layer (the regularizer's contribution).
  const std::vector<Tensor>* u_bar_adjoint = nullptr;
};

/// Backward pass through time given dL/dlogits, where logits is the mean of
/// the readout over T. Uses the surrogate `spec` for dO/dU.
GradientBundle bptt_backward(const Network& net, const Trace& trace, const Tensor& d_logits,
                             const SurrogateSpec& spec, const BackwardOptions& options = {});

/// Backward pass through rates: each layer is treated as one map from its
/// time-averaged drive to its firing rate, with the rate derivative fixed at
/// 1/T and no temporal term.
GradientBundle bptr_backward(const Network& net, const Trace& trace, const Tensor& d_logits,
                             const BackwardOptions& options = {});

double bptr_rate_factor(std::size_t timesteps);

struct CrossEntropy {
  double loss = 0.0;  // mean over the batch
  Tensor d_logits;    // [B, K]
};

CrossEntropy cross_entropy(const Tensor& logits, const std::vector<int>& labels);

/// Per hidden layer: mean over t of the running product over layers v <= l of
/// mean |h(U_bar_v(t))| across batch and neurons.
std::vector<double> p3_diagnostic(const Trace& trace, const SurrogateSpec& spec, double v_th);

}  // namespace spikeguard
