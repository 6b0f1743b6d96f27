#include "spikeguard/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spikeguard/error.hpp"

namespace spikeguard {

AttackKind parse_attack_kind(const std::string& name) {
  if (name == "fgsm") return AttackKind::Fgsm;
  if (name == "pgd") return AttackKind::Pgd;
  if (name == "bim") return AttackKind::Bim;
  if (name == "cw") return AttackKind::Cw;
  if (name == "gauss_noise") return AttackKind::GaussNoise;
  if (name == "uniform_noise") return AttackKind::UniformNoise;
  fail(ErrorCode::InvalidArgument, "unknown attack '" + name + "'");
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Fgsm: return "fgsm";
    case AttackKind::Pgd: return "pgd";
    case AttackKind::Bim: return "bim";
    case AttackKind::Cw: return "cw";
    case AttackKind::GaussNoise: return "gauss_noise";
    case AttackKind::UniformNoise: return "uniform_noise";
  }
  fail(ErrorCode::InvalidArgument, "unknown attack kind");
}

void AttackConfig::validate() const {
  require(epsilon >= 0.0 && std::isfinite(epsilon), "attack epsilon must be >= 0");
  require(step_alpha >= 0.0 && std::isfinite(step_alpha), "attack step_alpha must be >= 0");
  if (kind == AttackKind::Pgd || kind == AttackKind::Bim) require(steps >= 1, "iterative attacks need steps >= 1");
  if (kind == AttackKind::Cw) {
    require(cw_c >= 0.0, "cw_c must be >= 0");
    require(cw_steps >= 1, "cw_steps must be >= 1");
    require(cw_lr > 0.0, "cw_lr must be > 0");
  }
}

std::string AttackConfig::label() const {
  std::ostringstream os;
  os << to_string(kind) << "(eps=" << epsilon;
  if (kind == AttackKind::Pgd || kind == AttackKind::Bim) os << ",k=" << steps << ",alpha=" << step_alpha;
  if (kind == AttackKind::Cw) os << ",c=" << cw_c << ",steps=" << cw_steps;
  if (kind != AttackKind::GaussNoise && kind != AttackKind::UniformNoise) os << "," << to_string(approx);
  os << ")";
  return os.str();
}

namespace {

GradientBundle backward(const Network& net, const Trace& trace, const Tensor& d_logits, Approx approx) {
  return approx == Approx::Bptt ? bptt_backward(net, trace, d_logits, net.spec().surrogate)
                                : bptr_backward(net, trace, d_logits);
}

void check_batch(const Network& net, const Tensor& x, const std::vector<int>& labels) {
  if (x.rank() < 1 || x.dim(0) != labels.size())
    fail(ErrorCode::ShapeMismatch, "attack: " + std::to_string(labels.size()) + " labels for input " +
                                       shape_str(x.shape()));
  if (x.size() != labels.size() * net.spec().input_size())
    fail(ErrorCode::ShapeMismatch, "attack: input does not match the model");
  for (double v : x.data())
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::InvalidArgument, "attack: inputs must lie in [0, 1]");
}

double sign(double g) { return g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0); }

Tensor signed_steps(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
                    const Rng& rng, Tensor start, std::size_t steps, double step) {
  Tensor cur = std::move(start);
  for (std::size_t k = 0; k < steps; ++k) {
    const Rng enc = rng.substream(Stream::Poisson, k);
    const Tensor g = input_gradient(net, cur, labels, cfg.approx, &enc);
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = project(cur[i] + step * sign(g[i]), x[i], cfg.epsilon);
  }
  return cur;
}

}  // namespace

Tensor input_gradient(const Network& net, const Tensor& x, const std::vector<int>& labels, Approx approx,
                      const Rng* encoder_rng) {
  const Trace tr = net.forward(x, Mode::Eval, encoder_rng);
  const CrossEntropy ce = cross_entropy(tr.logits, labels);
  GradientBundle g = backward(net, tr, ce.d_logits, approx);
  return g.input.reshaped(x.shape());
}

double project(double v, double x0, double epsilon) {
  double lo = std::max(0.0, x0 - epsilon), hi = std::min(1.0, x0 + epsilon);
  while (hi - x0 > epsilon) hi = std::nextafter(hi, -std::numeric_limits<double>::infinity());
  while (x0 - lo > epsilon) lo = std::nextafter(lo, std::numeric_limits<double>::infinity());
  return std::clamp(v, lo, hi);
}

Tensor fgsm(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
            const Rng& rng) {
  cfg.validate();
  check_batch(net, x, labels);
  return signed_steps(net, x, labels, cfg, rng, x, 1, cfg.epsilon);
}

Tensor bim(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
           const Rng& rng) {
  cfg.validate();
  check_batch(net, x, labels);
  return signed_steps(net, x, labels, cfg, rng, x, cfg.steps, cfg.step_alpha);
}

Tensor pgd(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
           const Rng& rng) {
  cfg.validate();
  check_batch(net, x, labels);
  Rng start_rng = rng.substream(Stream::PgdStart);
  Tensor start(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    start[i] = project(x[i] + start_rng.uniform(-cfg.epsilon, cfg.epsilon), x[i], cfg.epsilon);
  return signed_steps(net, x, labels, cfg, rng, std::move(start), cfg.steps, cfg.step_alpha);
}

double cw_margin(const std::vector<double>& logits, std::size_t true_class) {
  if (true_class >= logits.size() || logits.size() < 2)
    fail(ErrorCode::InvalidArgument, "cw_margin: class index out of range");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (i != true_class) best = std::max(best, logits[i]);
  return std::max(best - logits[true_class], 0.0);
}

namespace {

struct CwEval {
  std::vector<double> objective;
  Trace trace;
  Tensor d_logits;  // gradient of c * max(Z_y - max_other, 0) w.r.t. the mean logits
};

CwEval cw_evaluate(const Network& net, const Tensor& x, const Tensor& x_hat, const std::vector<int>& labels,
                   double c, const Rng& enc) {
  const std::size_t B = labels.size(), K = net.spec().classes, per = x.size() / B;
  CwEval e;
  e.trace = net.forward(x_hat, Mode::Eval, &enc);
  e.d_logits = Tensor({B, K});
  e.objective.assign(B, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    double dist = 0.0;
    for (std::size_t i = 0; i < per; ++i) {
      const double d = x_hat[b * per + i] - x[b * per + i];
      dist += d * d;
    }
    const std::size_t y = static_cast<std::size_t>(labels[b]);
    std::size_t other = y == 0 ? 1 : 0;
    for (std::size_t k = 0; k < K; ++k)
      if (k != y && e.trace.logits[b * K + k] > e.trace.logits[b * K + other]) other = k;
    const double margin = e.trace.logits[b * K + y] - e.trace.logits[b * K + other];
    e.objective[b] = 0.5 * dist + c * std::max(margin, 0.0);
    if (margin > 0.0) {
      e.d_logits[b * K + y] = c;
      e.d_logits[b * K + other] = -c;
    }
  }
  return e;
}

}  // namespace

CwResult cw(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
            const Rng& rng) {
  cfg.validate();
  check_batch(net, x, labels);
  const std::size_t B = labels.size(), per = x.size() / B;
  const double T = static_cast<double>(net.spec().timesteps);
  constexpr double kWLimit = 15.0;
  Tensor w(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) w[i] = std::clamp(std::atanh(2.0 * x[i] - 1.0), -kWLimit, kWLimit);
  auto to_x = [&](const Tensor& wt) {
    Tensor xh(wt.shape());
    for (std::size_t i = 0; i < wt.size(); ++i) xh[i] = 0.5 * (std::tanh(wt[i]) + 1.0);
    return xh;
  };
  // dObjective/dw from an evaluated point.
  auto grad_w = [&](const Tensor& wt, const Tensor& xh, const CwEval& e) {
    const GradientBundle g = backward(net, e.trace, e.d_logits, cfg.approx);
    Tensor gw(wt.shape());
    for (std::size_t i = 0; i < wt.size(); ++i) {
      // The encoder copies x_hat to every step, so the logit gradient is the sum over t.
      const double dx = (xh[i] - x[i]) + g.input[i] * T;
      const double th = std::tanh(wt[i]);
      gw[i] = dx * 0.5 * (1.0 - th * th);
    }
    return gw;
  };

  Tensor xh = to_x(w);
  CwEval cur = cw_evaluate(net, x, xh, labels, cfg.cw_c, rng.substream(Stream::Poisson, 0));
  Tensor gw = grad_w(w, xh, cur);
  std::vector<double> lr(B, cfg.cw_lr);
  CwResult res;
  auto total = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double d : v) s += d;
    return s;
  };
  res.objective.push_back(total(cur.objective));
  for (std::size_t step = 1; step <= cfg.cw_steps; ++step) {
    Tensor w_try = w;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < per; ++i) {
        const std::size_t k = b * per + i;
        w_try[k] = std::clamp(w[k] - lr[b] * gw[k], -kWLimit, kWLimit);
      }
    const Tensor xh_try = to_x(w_try);
    CwEval trial = cw_evaluate(net, x, xh_try, labels, cfg.cw_c, rng.substream(Stream::Poisson, step));
    const Tensor gw_try = grad_w(w_try, xh_try, trial);
    for (std::size_t b = 0; b < B; ++b) {
      if (trial.objective[b] <= cur.objective[b]) {
        cur.objective[b] = trial.objective[b];
        for (std::size_t i = 0; i < per; ++i) {
          const std::size_t k = b * per + i;
          w[k] = w_try[k];
          xh[k] = xh_try[k];
          gw[k] = gw_try[k];
        }
      } else {
        lr[b] *= 0.5;
      }
    }
    res.objective.push_back(total(cur.objective));
  }
  res.x_adv = xh;
  res.l2.assign(B, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) {
      const double d = xh[b * per + i] - x[b * per + i];
      s += d * d;
    }
    res.l2[b] = std::sqrt(s);
  }
  return res;
}

Tensor random_noise(Rng& rng, const Tensor& x, AttackKind kind, double epsilon) {
  require(epsilon >= 0.0, "noise epsilon must be >= 0");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d;
    if (kind == AttackKind::GaussNoise) {
      d = epsilon * rng.normal();
    } else if (kind == AttackKind::UniformNoise) {
      d = rng.uniform(-epsilon, epsilon);
    } else {
      fail(ErrorCode::InvalidArgument, "random_noise: kind must be gauss_noise or uniform_noise");
    }
    out[i] = std::clamp(x[i] + d, 0.0, 1.0);
  }
  return out;
}

Tensor run_attack(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
                  std::uint64_t batch_index) {
  const Rng rng = Rng(cfg.seed).substream(Stream::Attack, batch_index);
  switch (cfg.kind) {
    case AttackKind::Fgsm: return fgsm(net, x, labels, cfg, rng);
    case AttackKind::Pgd: return pgd(net, x, labels, cfg, rng);
    case AttackKind::Bim: return bim(net, x, labels, cfg, rng);
    case AttackKind::Cw: return cw(net, x, labels, cfg, rng).x_adv;
    case AttackKind::GaussNoise:
    case AttackKind::UniformNoise: {
      cfg.validate();
      Rng noise = rng.substream(Stream::Noise);
      return random_noise(noise, x, cfg.kind, cfg.epsilon);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown attack kind");
}

}  // namespace spikeguard
