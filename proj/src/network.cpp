#include "spikeguard/network.hpp"

#include <algorithm>
#include <cmath>

#include "spikeguard/error.hpp"

namespace spikeguard {

void ModelSpec::validate() const {
  require(!input_shape.empty() && input_size() > 0, "model input shape must be non-empty");
  require(classes >= 2, "model needs at least two classes");
  require(timesteps >= 1, "model timesteps must be >= 1");
  lif.validate();
  surrogate.validate();
  require(tdbn_eps > 0.0, "tdbn eps must be > 0");
  require(tdbn_momentum >= 0.0 && tdbn_momentum <= 1.0, "tdbn momentum must lie in [0, 1]");
  Shape shape = input_shape;
  for (const auto& l : hidden) {
    require(l.width > 0, "hidden layer width must be > 0");
    if (l.kind == LayerKind::Conv) {
      require(shape.size() == 3, "conv layers need a [C, H, W] input");
    } else {
      shape = {shape_size(shape)};
    }
    shape[0] = l.width;
  }
}

namespace {

Shape with_time_batch(std::size_t t, std::size_t b, const Shape& per_sample) {
  Shape s{t, b};
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  return s;
}

}  // namespace

Network Network::init(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Network net;
  net.spec_ = spec;
  const Rng root(seed);
  Shape shape = spec.input_shape;
  for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
    const LayerSpec& ls = spec.hidden[l];
    HiddenLayer layer;
    layer.kind = ls.kind;
    Rng rng = root.substream(Stream::Init, l);
    double bound;
    if (ls.kind == LayerKind::Dense) {
      layer.in_shape = {shape_size(shape)};
      layer.out_shape = {ls.width};
      bound = 1.0 / std::sqrt(static_cast<double>(layer.in_shape[0]));
      layer.weight = uniform(rng, {layer.in_shape[0], ls.width}, -bound, bound);
    } else {
      layer.in_shape = shape;
      layer.out_shape = {ls.width, shape[1], shape[2]};
      bound = 1.0 / std::sqrt(static_cast<double>(shape[0] * 9));
      layer.weight = uniform(rng, {ls.width, shape[0], 3, 3}, -bound, bound);
    }
    layer.bias = uniform(rng, {ls.width}, -bound, bound);
    if (ls.tdbn) {
      TdbnParams bn = TdbnParams::init(ls.width, spec.tdbn_alpha, spec.lif.v_th);
      bn.eps = spec.tdbn_eps;
      bn.momentum = spec.tdbn_momentum;
      layer.bn = std::move(bn);
    }
    shape = layer.out_shape;
    net.hidden_.push_back(std::move(layer));
  }
  const std::size_t f = shape_size(shape);
  Rng rng = root.substream(Stream::Init, spec.hidden.size());
  const double bound = 1.0 / std::sqrt(static_cast<double>(f));
  net.out_w_ = uniform(rng, {f, spec.classes}, -bound, bound);
  net.out_b_ = uniform(rng, {spec.classes}, -bound, bound);
  return net;
}

std::vector<std::string> Network::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    const std::string p = "hidden" + std::to_string(l) + ".";
    names.push_back(p + "weight");
    names.push_back(p + "bias");
    if (hidden_[l].bn) {
      names.push_back(p + "tdbn.lambda");
      names.push_back(p + "tdbn.beta");
    }
  }
  names.push_back("readout.weight");
  names.push_back("readout.bias");
  return names;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> ps;
  for (auto& l : hidden_) {
    ps.push_back(&l.weight);
    ps.push_back(&l.bias);
    if (l.bn) {
      ps.push_back(&l.bn->lambda);
      ps.push_back(&l.bn->beta);
    }
  }
  ps.push_back(&out_w_);
  ps.push_back(&out_b_);
  return ps;
}

std::vector<const Tensor*> Network::parameters() const {
  auto ps = const_cast<Network*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

Tensor Network::encode(const Tensor& x, const Rng* encoder_rng) const {
  if (x.rank() < 1 || shape_size(x.shape()) != x.dim(0) * spec_.input_size())
    fail(ErrorCode::ShapeMismatch, "network input " + shape_str(x.shape()) + " does not match per-sample shape " +
                                       shape_str(spec_.input_shape));
  Shape s{x.dim(0)};
  s.insert(s.end(), spec_.input_shape.begin(), spec_.input_shape.end());
  const Tensor xs = x.reshaped(s);
  if (spec_.encoding == Encoding::Direct) return encode_direct(xs, spec_.timesteps);
  if (!encoder_rng) fail(ErrorCode::InvalidArgument, "poisson encoding needs an rng");
  return encode_poisson(*encoder_rng, xs, spec_.timesteps);
}

Trace Network::forward(const Tensor& x, Mode mode, const Rng* encoder_rng) const {
  return forward_encoded(encode(x, encoder_rng), mode);
}

Trace Network::forward_encoded(const Tensor& encoded, Mode mode) const {
  const std::size_t T = spec_.timesteps;
  if (encoded.rank() < 2 || encoded.dim(0) != T)
    fail(ErrorCode::ShapeMismatch, "encoded input must be [T, B, ...], got " + shape_str(encoded.shape()));
  const std::size_t B = encoded.dim(1);
  Trace tr;
  tr.mode = mode;
  tr.timesteps = T;
  tr.batch = B;
  tr.encoded = encoded;

  Tensor act = encoded;
  for (const HiddenLayer& layer : hidden_) {
    LayerTrace lt;
    lt.input = act;
    const Shape out_full = with_time_batch(T, B, layer.out_shape);
    if (layer.kind == LayerKind::Dense) {
      const std::size_t fin = layer.in_shape[0], fout = layer.out_shape[0];
      Tensor cur = matmul(act.reshaped({T * B, fin}), layer.weight);
      for (std::size_t r = 0; r < T * B; ++r)
        for (std::size_t j = 0; j < fout; ++j) cur[r * fout + j] += layer.bias[j];
      lt.current = cur.reshaped(out_full);
    } else {
      lt.current = Tensor(out_full);
      const std::size_t in_sz = shape_size(layer.in_shape), out_sz = shape_size(layer.out_shape);
      const std::size_t hw = layer.out_shape[1] * layer.out_shape[2];
      for (std::size_t r = 0; r < T * B; ++r) {
        Tensor img(layer.in_shape, std::vector<double>(act.data().begin() + static_cast<std::ptrdiff_t>(r * in_sz),
                                                       act.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * in_sz)));
        Tensor y = conv2d(img, layer.weight);
        for (std::size_t c = 0; c < layer.out_shape[0]; ++c)
          for (std::size_t s = 0; s < hw; ++s) y[c * hw + s] += layer.bias[c];
        std::copy(y.data().begin(), y.data().end(), lt.current.data().begin() + static_cast<std::ptrdiff_t>(r * out_sz));
      }
    }
    if (layer.bn) {
      TdbnOutput bo = tdbn_forward(*layer.bn, lt.current, mode == Mode::Train);
      lt.drive = std::move(bo.out);
      lt.bn = std::move(bo.cache);
    } else {
      lt.drive = lt.current;
    }

    Shape step_shape{B};
    step_shape.insert(step_shape.end(), layer.out_shape.begin(), layer.out_shape.end());
    LifLayerState state = LifLayerState::zeros(step_shape);
    lt.u = Tensor(out_full);
    lt.spikes = Tensor(out_full);
    for (std::size_t t = 0; t < T; ++t) {
      lif_step(state, spec_.lif, lt.drive.slice(t, 1).reshaped(step_shape));
      lt.u.assign_slice(t, state.u.reshaped(with_time_batch(1, B, layer.out_shape)));
      lt.spikes.assign_slice(t, state.spikes.reshaped(with_time_batch(1, B, layer.out_shape)));
    }
    act = lt.spikes;
    tr.layers.push_back(std::move(lt));
  }

  const std::size_t f = out_w_.dim(0), K = spec_.classes;
  tr.logits_t = matmul(act.reshaped({T * B, f}), out_w_);
  for (std::size_t r = 0; r < T * B; ++r)
    for (std::size_t k = 0; k < K; ++k) tr.logits_t[r * K + k] += out_b_[k];
  tr.logits_t = tr.logits_t.reshaped({T, B, K});
  tr.logits = Tensor({B, K});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < B * K; ++i) tr.logits[i] += tr.logits_t[t * B * K + i];
  scale_inplace(tr.logits, 1.0 / static_cast<double>(T));
  return tr;
}

Tensor Network::logits(const Tensor& x, const Rng* encoder_rng) const {
  return forward(x, Mode::Eval, encoder_rng).logits;
}

void Network::update_running_stats(const Trace& trace) {
  for (std::size_t l = 0; l < hidden_.size(); ++l)
    if (hidden_[l].bn && trace.layers.at(l).bn) tdbn_update_running(*hidden_[l].bn, *trace.layers[l].bn);
}

Tensor batch_rows(const Tensor& data, const std::vector<std::size_t>& rows) {
  const std::size_t stride = data.size() / data.dim(0);
  Shape s = data.shape();
  s[0] = rows.size();
  Tensor out(s);
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy_n(data.data().begin() + static_cast<std::ptrdiff_t>(rows[r] * stride), stride,
                out.data().begin() + static_cast<std::ptrdiff_t>(r * stride));
  return out;
}

}  // namespace spikeguard
