#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spikeguard/encoding.hpp"
#include "spikeguard/neuron.hpp"
#include "spikeguard/rng.hpp"
#include "spikeguard/surrogate.hpp"
#include "spikeguard/tdbn.hpp"
#include "spikeguard/tensor.hpp"

namespace spikeguard {

enum class LayerKind { Dense, Conv };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  std::size_t width = 0;  // units (dense) or output channels (conv)
  bool tdbn = true;
};

struct ModelSpec {
  Shape input_shape{784};  // per sample; conv layers need [C, H, W]
  std::vector<LayerSpec> hidden{{LayerKind::Dense, 256, true}};
  std::size_t classes = 10;
  std::size_t timesteps = 4;
  LifParams lif;
  SurrogateSpec surrogate;
  Encoding encoding = Encoding::Direct;
  double tdbn_alpha = 1.0;
  double tdbn_eps = 1e-5;
  double tdbn_momentum = 0.1;

  void validate() const;
  std::size_t input_size() const { return shape_size(input_shape); }
};

enum class Mode { Train, Eval };

struct HiddenLayer {
  LayerKind kind = LayerKind::Dense;
  Shape in_shape;   // per sample
  Shape out_shape;  // per sample
  Tensor weight;    // dense [in, out]; conv [out_c, in_c, 3, 3]
  Tensor bias;      // [out units] or [out channels]
  std::optional<TdbnParams> bn;

  std::size_t channels() const { return out_shape[0]; }
};

/// Everything the backward passes need, per hidden layer, with a leading
/// [T, B] on every tensor.
struct LayerTrace {
  Tensor input;
  Tensor current;  // synaptic current before normalization
  std::optional<TdbnCache> bn;
  Tensor drive;   // current fed to the neurons
  Tensor u;       // pre-spike membrane potential
  Tensor spikes;
};

struct Trace {
  Mode mode = Mode::Train;
  std::size_t timesteps = 0;
  std::size_t batch = 0;
  Tensor encoded;  // [T, B, input...]
  std::vector<LayerTrace> layers;
  Tensor logits_t;  // [T, B, K]
  Tensor logits;    // [B, K], mean over T
};

class Network {
 public:
  Network() = default;
  static Network init(const ModelSpec& spec, std::uint64_t seed);

  const ModelSpec& spec() const noexcept { return spec_; }
  ModelSpec& mutable_spec() noexcept { return spec_; }
  std::size_t num_hidden() const noexcept { return hidden_.size(); }
  const HiddenLayer& hidden(std::size_t i) const { return hidden_.at(i); }
  HiddenLayer& hidden(std::size_t i) { return hidden_.at(i); }
  const Tensor& readout_weight() const noexcept { return out_w_; }
  const Tensor& readout_bias() const noexcept { return out_b_; }
  Tensor& readout_weight() noexcept { return out_w_; }
  Tensor& readout_bias() noexcept { return out_b_; }

  /// Trainable tensors in a fixed order: per hidden layer weight, bias,
  /// [lambda, beta]; then readout weight, bias.
  std::vector<std::string> parameter_names() const;
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  /// x is [B, input...]. Poisson encoding needs `encoder_rng`.
  Trace forward(const Tensor& x, Mode mode, const Rng* encoder_rng = nullptr) const;
  Trace forward_encoded(const Tensor& encoded, Mode mode) const;
  Tensor encode(const Tensor& x, const Rng* encoder_rng) const;
  Tensor logits(const Tensor& x, const Rng* encoder_rng = nullptr) const;

  void update_running_stats(const Trace& trace);

 private:
  ModelSpec spec_;
  std::vector<HiddenLayer> hidden_;
  Tensor out_w_;  // [F_last, K]
  Tensor out_b_;  // [K]
};

/// Concatenates batch rows; all inputs must share the per-sample shape.
Tensor batch_rows(const Tensor& data, const std::vector<std::size_t>& rows);

}  // namespace spikeguard
