#include "spikeguard/backprop.hpp"

#include <cmath>

#include "spikeguard/error.hpp"

namespace spikeguard {

Approx parse_approx(const std::string& name) {
  if (name == "bptt") return Approx::Bptt;
  if (name == "bptr") return Approx::Bptr;
  fail(ErrorCode::InvalidArgument, "unknown gradient approximation '" + name + "'");
}

std::string to_string(Approx approx) { return approx == Approx::Bptt ? "bptt" : "bptr"; }

bool GradientBundle::all_finite() const {
  for (const auto& p : params)
    if (!p.all_finite()) return false;
  return input.all_finite() && encoded.all_finite();
}

double bptr_rate_factor(std::size_t timesteps) {
  require(timesteps >= 1, "bptr needs T >= 1");
  return 1.0 / static_cast<double>(timesteps);
}

namespace {

void check_trace(const Network& net, const Trace& trace, const Tensor& d_logits) {
  if (trace.layers.size() != net.num_hidden() || trace.timesteps != net.spec().timesteps || trace.encoded.empty())
    fail(ErrorCode::InvalidArgument, "backward: trace is missing or does not belong to this network");
  if (d_logits.shape() != Shape{trace.batch, net.spec().classes})
    fail(ErrorCode::ShapeMismatch, "backward: d_logits must be " + shape_str({trace.batch, net.spec().classes}));
}

// Readout gradients; returns dL/dO of the last hidden layer (or the encoded
// input when there are no hidden layers), [T, B, F].
Tensor readout_backward(const Network& net, const Trace& trace, const Tensor& d_logits, Tensor& dw, Tensor& db) {
  const std::size_t T = trace.timesteps, B = trace.batch, K = net.spec().classes;
  const Tensor& last = trace.layers.empty() ? trace.encoded : trace.layers.back().spikes;
  const std::size_t F = net.readout_weight().dim(0);
  Tensor d_t = d_logits;
  scale_inplace(d_t, 1.0 / static_cast<double>(T));
  Tensor summed({B, F});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < B * F; ++i) summed[i] += last[t * B * F + i];
  dw = matmul_tn(summed, d_t);
  db = Tensor({K});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t k = 0; k < K; ++k) db[k] += d_logits[b * K + k];
  const Tensor d_o = matmul_nt(d_t, net.readout_weight());  // identical for every t
  Tensor out({T, B, F});
  for (std::size_t t = 0; t < T; ++t)
    std::copy(d_o.data().begin(), d_o.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(t * B * F));
  return out.reshaped(last.shape());
}

// Through tdBN and the synaptic map of one layer: given dL/d(drive), fills the
// parameter gradients and returns dL/d(input) if asked.
Tensor layer_backward(const HiddenLayer& layer, const LayerTrace& lt, const Tensor& d_drive, std::size_t T,
                      std::size_t B, bool want_input, std::vector<Tensor>& grads) {
  Tensor d_cur;
  Tensor d_lambda, d_beta;
  if (layer.bn) {
    TdbnGrad g = tdbn_backward(*layer.bn, *lt.bn, d_drive);
    d_cur = std::move(g.input);
    d_lambda = std::move(g.lambda);
    d_beta = std::move(g.beta);
  } else {
    d_cur = d_drive;
  }
  Tensor dw(layer.weight.shape()), db(layer.bias.shape()), d_in;
  if (layer.kind == LayerKind::Dense) {
    const std::size_t fin = layer.in_shape[0], fout = layer.out_shape[0];
    const Tensor dc = d_cur.reshaped({T * B, fout});
    dw = matmul_tn(lt.input.reshaped({T * B, fin}), dc);
    for (std::size_t r = 0; r < T * B; ++r)
      for (std::size_t j = 0; j < fout; ++j) db[j] += dc[r * fout + j];
    if (want_input) d_in = matmul_nt(dc, layer.weight).reshaped(lt.input.shape());
  } else {
    const std::size_t in_sz = shape_size(layer.in_shape), out_sz = shape_size(layer.out_shape);
    const std::size_t hw = layer.out_shape[1] * layer.out_shape[2];
    if (want_input) d_in = Tensor(lt.input.shape());
    for (std::size_t r = 0; r < T * B; ++r) {
      const auto off_in = static_cast<std::ptrdiff_t>(r * in_sz), off_out = static_cast<std::ptrdiff_t>(r * out_sz);
      Tensor x(layer.in_shape, std::vector<double>(lt.input.data().begin() + off_in,
                                                   lt.input.data().begin() + off_in + static_cast<std::ptrdiff_t>(in_sz)));
      Tensor dy(layer.out_shape, std::vector<double>(d_cur.data().begin() + off_out,
                                                     d_cur.data().begin() + off_out + static_cast<std::ptrdiff_t>(out_sz)));
      conv2d_backward_kernel(x, dy, dw);
      for (std::size_t c = 0; c < layer.out_shape[0]; ++c)
        for (std::size_t s = 0; s < hw; ++s) db[c] += dy[c * hw + s];
      if (want_input) {
        const Tensor dx = conv2d_backward_input(dy, layer.weight);
        std::copy(dx.data().begin(), dx.data().end(), d_in.data().begin() + off_in);
      }
    }
  }
  grads.push_back(std::move(dw));
  grads.push_back(std::move(db));
  if (layer.bn) {
    grads.push_back(std::move(d_lambda));
    grads.push_back(std::move(d_beta));
  }
  return d_in;
}

template <typename DriveAdjoint>
GradientBundle backward_common(const Network& net, const Trace& trace, const Tensor& d_logits,
                               const BackwardOptions& options, DriveAdjoint drive_adjoint) {
  check_trace(net, trace, d_logits);
  const std::size_t T = trace.timesteps, B = trace.batch, L = net.num_hidden();
  if (options.u_bar_adjoint && options.u_bar_adjoint->size() != L)
    fail(ErrorCode::InvalidArgument, "backward: one potential adjoint per hidden layer is required");

  Tensor d_out_w, d_out_b;
  Tensor d_o = readout_backward(net, trace, d_logits, d_out_w, d_out_b);

  // Layer gradients are produced last-to-first, then reordered.
  std::vector<std::vector<Tensor>> per_layer(L);
  for (std::size_t li = L; li-- > 0;) {
    const LayerTrace& lt = trace.layers[li];
    const Tensor* extra = options.u_bar_adjoint ? &(*options.u_bar_adjoint)[li] : nullptr;
    if (extra && extra->shape() != lt.u.shape())
      fail(ErrorCode::ShapeMismatch, "backward: potential adjoint shape mismatch in layer " + std::to_string(li));
    const Tensor d_drive = drive_adjoint(li, lt, d_o, extra);
    const bool want_input = li > 0 || options.input_gradient;
    d_o = layer_backward(net.hidden(li), lt, d_drive, T, B, want_input, per_layer[li]);
  }

  GradientBundle g;
  for (auto& v : per_layer)
    for (auto& t : v) g.params.push_back(std::move(t));
  g.params.push_back(std::move(d_out_w));
  g.params.push_back(std::move(d_out_b));
  if (options.input_gradient) {
    g.encoded = std::move(d_o);
    const std::size_t per = g.encoded.size() / T;
    Shape s(g.encoded.shape().begin() + 1, g.encoded.shape().end());
    g.input = Tensor(s);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < per; ++i) g.input[i] += g.encoded[t * per + i];
    scale_inplace(g.input, 1.0 / static_cast<double>(T));
  }
  return g;
}

}  // namespace

GradientBundle bptt_backward(const Network& net, const Trace& trace, const Tensor& d_logits,
                             const SurrogateSpec& spec, const BackwardOptions& options) {
  spec.validate();
  const LifParams& lif = net.spec().lif;
  const double tau = lif.tau, vth = lif.v_th;
  const bool soft = lif.reset == ResetMode::Soft;
  return backward_common(net, trace, d_logits, options,
                         [&](std::size_t, const LayerTrace& lt, const Tensor& d_o, const Tensor* extra) {
                           const std::size_t T = trace.timesteps;
                           const std::size_t per = lt.u.size() / T;
                           Tensor d_u(lt.u.shape());
                           std::vector<double> next(per, 0.0);  // dL/dU(t+1)
                           for (std::size_t t = T; t-- > 0;) {
                             for (std::size_t i = 0; i < per; ++i) {
                               const std::size_t k = t * per + i;
                               const double h = spec(lt.u[k] - vth);
                               // dU(t+1)/dU(t), through the reset of step t
                               const double decay = soft ? tau * (1.0 - vth * h) : tau * (1.0 - lt.spikes[k]);
                               double g = d_o[k] * h + next[i] * decay;
                               if (extra) g += (*extra)[k];
                               d_u[k] = g;
                               next[i] = g;
                             }
                           }
                           return d_u;
                         });
}

GradientBundle bptr_backward(const Network& net, const Trace& trace, const Tensor& d_logits,
                             const BackwardOptions& options) {
  const double factor = bptr_rate_factor(trace.timesteps);
  return backward_common(net, trace, d_logits, options,
                         [&](std::size_t, const LayerTrace& lt, const Tensor& d_o, const Tensor* extra) {
                           const std::size_t T = trace.timesteps;
                           const std::size_t per = lt.u.size() / T;
                           // dL/d(rate) is the sum of the per-step adjoints; the
                           // rate responds to the mean drive with slope 1/T, and
                           // the mean drive to each step's drive with 1/T.
                           std::vector<double> rate_adj(per, 0.0);
                           for (std::size_t t = 0; t < T; ++t)
                             for (std::size_t i = 0; i < per; ++i) {
                               rate_adj[i] += d_o[t * per + i];
                               if (extra) rate_adj[i] += (*extra)[t * per + i];
                             }
                           Tensor d_drive(lt.u.shape());
                           for (std::size_t t = 0; t < T; ++t)
                             for (std::size_t i = 0; i < per; ++i)
                               d_drive[t * per + i] = rate_adj[i] * factor / static_cast<double>(T);
                           return d_drive;
                         });
}

CrossEntropy cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size())
    fail(ErrorCode::ShapeMismatch, "cross_entropy: logits " + shape_str(logits.shape()) + " vs " +
                                       std::to_string(labels.size()) + " labels");
  const std::size_t B = logits.dim(0), K = logits.dim(1);
  require(B > 0, "cross_entropy: empty batch");
  if (!logits.all_finite()) fail(ErrorCode::Numeric, "cross_entropy: non-finite logits");
  CrossEntropy ce;
  ce.d_logits = Tensor({B, K});
  for (std::size_t b = 0; b < B; ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= K)
      fail(ErrorCode::InvalidArgument, "cross_entropy: label " + std::to_string(labels[b]) + " out of range");
    double m = logits[b * K];
    for (std::size_t k = 1; k < K; ++k) m = std::max(m, logits[b * K + k]);
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) z += std::exp(logits[b * K + k] - m);
    const double log_z = m + std::log(z);
    ce.loss += log_z - logits[b * K + static_cast<std::size_t>(labels[b])];
    for (std::size_t k = 0; k < K; ++k) {
      const double p = std::exp(logits[b * K + k] - log_z);
      ce.d_logits[b * K + k] = (p - (static_cast<int>(k) == labels[b] ? 1.0 : 0.0)) / static_cast<double>(B);
    }
  }
  ce.loss /= static_cast<double>(B);
  return ce;
}

std::vector<double> p3_diagnostic(const Trace& trace, const SurrogateSpec& spec, double v_th) {
  const std::size_t T = trace.timesteps;
  std::vector<double> running(T, 1.0), out;
  for (const LayerTrace& lt : trace.layers) {
    const std::size_t per = lt.u.size() / T;
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      double m = 0.0;
      for (std::size_t i = 0; i < per; ++i) m += std::abs(spec(lt.u[t * per + i] - v_th));
      running[t] *= m / static_cast<double>(per);
      acc += running[t];
    }
    out.push_back(acc / static_cast<double>(T));
  }
  return out;
}

}  // namespace spikeguard
