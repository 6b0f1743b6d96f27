#pragma once

// Reference implementations that share no code with the library: a
// forward-mode dual-number unrolling of dense networks, a direct-loop
// convolution and finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "spikeguard/network.hpp"

namespace oracle {

using spikeguard::Tensor;

struct Dual {
  double v = 0.0;
  double d = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator*(double s, Dual a) { return {s * a.v, s * a.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
inline Dual dsqrt(Dual a) {
  const double r = std::sqrt(a.v);
  return {r, a.d / (2.0 * r)};
}
inline Dual dexp(Dual a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual dlog(Dual a) { return {std::log(a.v), a.d / a.v}; }

inline double surrogate(const spikeguard::SurrogateSpec& s, double u) {
  const double g = s.gamma;
  switch (s.family) {
    case spikeguard::SurrogateFamily::Triangle:
      return std::max(g - std::abs(u), 0.0) / (g * g);
    case spikeguard::SurrogateFamily::Rectangular:
      return std::abs(u) <= g ? 1.0 / (2.0 * g) : 0.0;
    case spikeguard::SurrogateFamily::Sigmoid: {
      const double sg = 1.0 / (1.0 + std::exp(-u / g));
      return sg * (1.0 - sg) / g;
    }
    case spikeguard::SurrogateFamily::Superspike:
      return 1.0 / ((1.0 + std::abs(u) / g) * (1.0 + std::abs(u) / g));
  }
  return 0.0;
}

// Which scalar carries the unit tangent: parameter tensor `param` element
// `index`, or input element `index` when param < 0.
struct Seed {
  int param = -1;
  std::size_t index = 0;
};

// Batch-mean cross-entropy of the train-mode forward pass of a dense, direct
// coded network, plus sum(adjoint * (U - v_th)) when adjoints are given. The
// tangent is the derivative with respect to the seeded scalar, with spikes
// differentiated through the surrogate and the hard-reset coupling detached.
inline Dual loss(const spikeguard::Network& net, const Tensor& x, const std::vector<int>& y, Seed seed,
                 const std::vector<Tensor>* adjoint = nullptr) {
  const auto& spec = net.spec();
  const std::size_t T = spec.timesteps, B = y.size(), L = net.num_hidden();
  const double vth = spec.lif.v_th, tau = spec.lif.tau;
  const bool soft = spec.lif.reset == spikeguard::ResetMode::Soft;

  std::vector<std::vector<Dual>> params;
  for (const Tensor* p : net.parameters()) {
    std::vector<Dual> d(p->size());
    for (std::size_t i = 0; i < p->size(); ++i) d[i] = {(*p)[i], 0.0};
    params.push_back(std::move(d));
  }
  const std::size_t F0 = spec.input_size();
  std::vector<Dual> xin(B * F0);
  for (std::size_t i = 0; i < B * F0; ++i) xin[i] = {x[i], 0.0};
  if (seed.param >= 0)
    params[static_cast<std::size_t>(seed.param)][seed.index].d = 1.0;
  else
    xin[seed.index].d = 1.0;

  // act[t][b][i]
  std::vector<std::vector<std::vector<Dual>>> act(T, std::vector<std::vector<Dual>>(B));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t b = 0; b < B; ++b) act[t][b].assign(xin.begin() + b * F0, xin.begin() + (b + 1) * F0);

  Dual extra;
  std::size_t pi = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = net.hidden(l);
    const std::size_t in = act[0][0].size(), out = layer.weight.dim(1);
    const auto& W = params[pi++];
    const auto& bias = params[pi++];
    std::vector<std::vector<std::vector<Dual>>> cur(T, std::vector<std::vector<Dual>>(B, std::vector<Dual>(out)));
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < out; ++j) {
          Dual s = bias[j];
          for (std::size_t i = 0; i < in; ++i) s = s + act[t][b][i] * W[i * out + j];
          cur[t][b][j] = s;
        }
    if (layer.bn) {
      const auto& lam = params[pi++];
      const auto& beta = params[pi++];
      const double n = static_cast<double>(T * B);
      for (std::size_t j = 0; j < out; ++j) {
        Dual mean;
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t b = 0; b < B; ++b) mean = mean + cur[t][b][j];
        mean = (1.0 / n) * mean;
        Dual var;
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t b = 0; b < B; ++b) {
            const Dual c = cur[t][b][j] - mean;
            var = var + c * c;
          }
        var = (1.0 / n) * var;
        const Dual denom = dsqrt(var + Dual{layer.bn->eps, 0.0});
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t b = 0; b < B; ++b)
            cur[t][b][j] = (layer.bn->alpha * layer.bn->v_th) * lam[j] * ((cur[t][b][j] - mean) / denom) + beta[j];
      }
    }
    std::vector<std::vector<std::vector<Dual>>> spikes(T, std::vector<std::vector<Dual>>(B, std::vector<Dual>(out)));
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t j = 0; j < out; ++j) {
        Dual u_prev, r_prev;
        for (std::size_t t = 0; t < T; ++t) {
          const Dual u = tau * (u_prev - r_prev) + cur[t][b][j];
          const double ub = u.v - vth;
          const Dual o{ub >= 0.0 ? 1.0 : 0.0, surrogate(spec.surrogate, ub) * u.d};
          if (adjoint) extra = extra + Dual{(*adjoint)[l][(t * B + b) * out + j], 0.0} * (u - Dual{vth, 0.0});
          spikes[t][b][j] = o;
          r_prev = soft ? vth * o : o.v * u;
          u_prev = u;
        }
      }
    act = std::move(spikes);
  }

  const auto& Wo = params[pi++];
  const auto& bo = params[pi++];
  const std::size_t F = act[0][0].size(), K = spec.classes;
  Dual total;
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<Dual> z(K);
    for (std::size_t k = 0; k < K; ++k) {
      Dual s;
      for (std::size_t t = 0; t < T; ++t) {
        Dual zt = bo[k];
        for (std::size_t j = 0; j < F; ++j) zt = zt + act[t][b][j] * Wo[j * K + k];
        s = s + zt;
      }
      z[k] = (1.0 / static_cast<double>(T)) * s;
    }
    double zmax = z[0].v;
    for (const auto& v : z) zmax = std::max(zmax, v.v);
    Dual se;
    for (const auto& v : z) se = se + dexp(v - Dual{zmax, 0.0});
    total = total + (dlog(se) + Dual{zmax, 0.0} - z[static_cast<std::size_t>(y[b])]);
  }
  return (1.0 / static_cast<double>(B)) * total + extra;
}

struct Gradients {
  std::vector<Tensor> params;
  Tensor input;  // (1/T) d loss / d x for direct coding
};

inline Gradients gradients(const spikeguard::Network& net, const Tensor& x, const std::vector<int>& y,
                           const std::vector<Tensor>* adjoint = nullptr) {
  Gradients g;
  const auto ps = net.parameters();
  for (std::size_t p = 0; p < ps.size(); ++p) {
    Tensor t(ps[p]->shape());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = loss(net, x, y, {static_cast<int>(p), i}, adjoint).d;
    g.params.push_back(std::move(t));
  }
  g.input = Tensor(x.shape());
  const double T = static_cast<double>(net.spec().timesteps);
  for (std::size_t i = 0; i < x.size(); ++i) g.input[i] = loss(net, x, y, {-1, i}, adjoint).d / T;
  return g;
}

// Same-padded 3x3 convolution by direct summation. x [C_in, H, W], k [C_out, C_in, 3, 3].
inline Tensor conv3x3(const Tensor& x, const Tensor& k) {
  const std::size_t ci = x.dim(0), H = x.dim(1), Wd = x.dim(2), co = k.dim(0);
  Tensor y({co, H, Wd});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t r = 0; r < H; ++r)
      for (std::size_t c = 0; c < Wd; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < ci; ++i)
          for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
              const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
              if (rr < 0 || cc < 0 || rr >= static_cast<long>(H) || cc >= static_cast<long>(Wd)) continue;
              s += x[(i * H + static_cast<std::size_t>(rr)) * Wd + static_cast<std::size_t>(cc)] *
                   k[((o * ci + i) * 3 + static_cast<std::size_t>(dr + 1)) * 3 + static_cast<std::size_t>(dc + 1)];
            }
        y[(o * H + r) * Wd + c] = s;
      }
  return y;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double relative_error(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
