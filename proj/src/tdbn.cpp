#include "spikeguard/tdbn.hpp"

#include <cmath>

#include "spikeguard/error.hpp"

namespace spikeguard {

namespace {

struct Layout {
  std::size_t outer;    // T * B
  std::size_t channels;
  std::size_t spatial;
};

Layout layout_of(const Tensor& input, std::size_t channels) {
  if (input.rank() < 3) fail(ErrorCode::ShapeMismatch, "tdbn expects [T, B, C, ...], got " + shape_str(input.shape()));
  if (input.dim(2) != channels)
    fail(ErrorCode::ShapeMismatch, "tdbn channel mismatch: " + std::to_string(input.dim(2)) + " vs " +
                                       std::to_string(channels));
  std::size_t spatial = 1;
  for (std::size_t a = 3; a < input.rank(); ++a) spatial *= input.dim(a);
  const Layout l{input.dim(0) * input.dim(1), channels, spatial};
  if (l.outer * l.spatial == 0) fail(ErrorCode::InvalidArgument, "tdbn: channel has no elements");
  return l;
}

}  // namespace

TdbnParams TdbnParams::init(std::size_t channels, double alpha, double v_th) {
  TdbnParams p;
  p.alpha = alpha;
  p.v_th = v_th;
  p.lambda = Tensor({channels}, 1.0);
  p.beta = Tensor({channels}, 0.0);
  p.running_mean = Tensor({channels}, 0.0);
  p.running_var = Tensor({channels}, 1.0);
  return p;
}

void TdbnParams::validate() const {
  require(eps > 0.0, "tdbn eps must be > 0");
  require(channels() > 0, "tdbn needs at least one channel");
  for (double v : running_var.data()) require(v >= 0.0, "tdbn running variance must be >= 0");
}

TdbnOutput tdbn_forward(const TdbnParams& params, const Tensor& input, bool training) {
  const Layout l = layout_of(input, params.channels());
  TdbnOutput res;
  TdbnCache& cache = res.cache;
  cache.training = training;
  cache.mean = Tensor({l.channels});
  cache.var = Tensor({l.channels});
  cache.inv_std = Tensor({l.channels});
  const double n = static_cast<double>(l.outer * l.spatial);

  if (training) {
    for (std::size_t o = 0; o < l.outer; ++o)
      for (std::size_t c = 0; c < l.channels; ++c)
        for (std::size_t s = 0; s < l.spatial; ++s) cache.mean[c] += input[(o * l.channels + c) * l.spatial + s];
    for (std::size_t c = 0; c < l.channels; ++c) cache.mean[c] /= n;
    for (std::size_t o = 0; o < l.outer; ++o)
      for (std::size_t c = 0; c < l.channels; ++c)
        for (std::size_t s = 0; s < l.spatial; ++s) {
          const double d = input[(o * l.channels + c) * l.spatial + s] - cache.mean[c];
          cache.var[c] += d * d;
        }
    for (std::size_t c = 0; c < l.channels; ++c) cache.var[c] /= n;
  } else {
    cache.mean = params.running_mean;
    cache.var = params.running_var;
  }
  for (std::size_t c = 0; c < l.channels; ++c) cache.inv_std[c] = 1.0 / std::sqrt(cache.var[c] + params.eps);

  cache.normalized = Tensor(input.shape());
  res.out = Tensor(input.shape());
  const double scale = params.alpha * params.v_th;
  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t c = 0; c < l.channels; ++c) {
      const double g = params.lambda[c] * scale;
      for (std::size_t s = 0; s < l.spatial; ++s) {
        const std::size_t i = (o * l.channels + c) * l.spatial + s;
        const double xn = (input[i] - cache.mean[c]) * cache.inv_std[c];
        cache.normalized[i] = xn;
        res.out[i] = g * xn + params.beta[c];
      }
    }
  return res;
}

TdbnGrad tdbn_backward(const TdbnParams& params, const TdbnCache& cache, const Tensor& d_out) {
  const Layout l = layout_of(d_out, params.channels());
  TdbnGrad g{Tensor(d_out.shape()), Tensor({l.channels}), Tensor({l.channels})};
  const double scale = params.alpha * params.v_th;
  const double n = static_cast<double>(l.outer * l.spatial);

  // Per channel: sum of dy and of dy * x_norm.
  Tensor sum_dy({l.channels}), sum_dy_xn({l.channels});
  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t c = 0; c < l.channels; ++c)
      for (std::size_t s = 0; s < l.spatial; ++s) {
        const std::size_t i = (o * l.channels + c) * l.spatial + s;
        sum_dy[c] += d_out[i];
        sum_dy_xn[c] += d_out[i] * cache.normalized[i];
      }
  for (std::size_t c = 0; c < l.channels; ++c) {
    g.beta[c] = sum_dy[c];
    g.lambda[c] = sum_dy_xn[c] * scale;
  }

  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t c = 0; c < l.channels; ++c) {
      const double gain = params.lambda[c] * scale * cache.inv_std[c];
      for (std::size_t s = 0; s < l.spatial; ++s) {
        const std::size_t i = (o * l.channels + c) * l.spatial + s;
        if (cache.training) {
          g.input[i] = gain * (d_out[i] - sum_dy[c] / n - cache.normalized[i] * sum_dy_xn[c] / n);
        } else {
          g.input[i] = gain * d_out[i];
        }
      }
    }
  return g;
}

void tdbn_update_running(TdbnParams& params, const TdbnCache& cache) {
  if (!cache.training) return;
  const double m = params.momentum;
  for (std::size_t c = 0; c < params.channels(); ++c) {
    params.running_mean[c] = (1.0 - m) * params.running_mean[c] + m * cache.mean[c];
    params.running_var[c] = (1.0 - m) * params.running_var[c] + m * cache.var[c];
  }
}

}  // namespace spikeguard
