#include "spikeguard/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include "spikeguard/error.hpp"
#include "spikeguard/mpd.hpp"

namespace spikeguard {

double cumulative_decay(double tau, std::size_t t) {
  require(t >= 1, "cumulative_decay: t must be >= 1");
  double d = 0.0, p = 1.0;
  for (std::size_t i = 0; i < t; ++i) {
    d += p;
    p *= tau;
  }
  return d;
}

void Theorem1Params::validate() const {
  require(tau >= 0.0 && tau <= 1.0, "theorem1: tau must lie in [0, 1]");
  require(timesteps >= 1, "theorem1: T must be >= 1");
  require(v_th > 0.0 && bn_v_th > 0.0, "theorem1: thresholds must be > 0");
  if (reset != ResetMode::Soft) fail(ErrorCode::InvalidArgument, "theorem1 covers the soft reset only");
  if (!rates.empty()) {
    require(rates.size() == timesteps, "theorem1: one firing rate per timestep is required");
    for (double r : rates) require(r >= 0.0 && r <= 1.0, "theorem1: firing rates must lie in [0, 1]");
  }
}

Theorem1Moments theorem1_closed_form(const Theorem1Params& p) {
  p.validate();
  Theorem1Moments m;
  const double s2 = p.drive_std() * p.drive_std();
  for (std::size_t t = 1; t <= p.timesteps; ++t) {
    double shift = 0.0;
    if (!p.rates.empty())
      for (std::size_t i = 1; i < t; ++i) shift += std::pow(p.tau, static_cast<double>(t - i)) * p.rates[i - 1] * p.v_th;
    m.reset_shift.push_back(shift);
    m.mean.push_back(p.beta * cumulative_decay(p.tau, t) - shift);
    m.var.push_back(s2 * cumulative_decay(p.tau * p.tau, t));
  }
  return m;
}

Theorem1Sample theorem1_monte_carlo(const Rng& rng, const Theorem1Params& p, std::size_t n_trials) {
  p.validate();
  require(n_trials >= 10000, "theorem1_monte_carlo: at least 1e4 trials are required");
  const std::size_t T = p.timesteps;
  std::vector<double> mean(T, 0.0), m2(T, 0.0), fired(T, 0.0);
  Rng r = rng.substream(Stream::MonteCarlo);
  const double sd = p.drive_std();
  for (std::size_t n = 0; n < n_trials; ++n) {
    double u = 0.0, o = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      u = p.tau * (u - o * p.v_th) + (p.beta + sd * r.normal());
      o = u >= p.v_th ? 1.0 : 0.0;
      // Welford update, one accumulator per timestep.
      const double d = u - mean[t];
      mean[t] += d / static_cast<double>(n + 1);
      m2[t] += d * (u - mean[t]);
      fired[t] += o;
    }
  }
  Theorem1Sample s;
  s.trials = n_trials;
  for (std::size_t t = 0; t < T; ++t) {
    s.mean.push_back(mean[t]);
    s.var.push_back(m2[t] / static_cast<double>(n_trials - 1));
    s.rates.push_back(fired[t] / static_cast<double>(n_trials));
  }
  return s;
}

double chi2_quantile_wh(double dof, double z) {
  require(dof > 0.0, "chi2 quantile: dof must be > 0");
  const double a = 2.0 / (9.0 * dof);
  const double c = 1.0 - a + z * std::sqrt(a);
  return dof * c * c * c;
}

GaussianFit gaussian_fit(std::vector<double> samples) {
  require(samples.size() >= 100, "gaussian_fit: at least 100 samples are required");
  const double n = static_cast<double>(samples.size());
  GaussianFit f;
  double acc = 0.0;
  for (double v : samples) acc += v;
  f.mu = acc / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - f.mu) * (v - f.mu);
  f.sigma = std::sqrt(ss / n);
  if (f.sigma == 0.0) {
    f.degenerate = true;
    f.max_cdf_dev = 1.0;
    return f;
  }
  std::sort(samples.begin(), samples.end());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = normal_cdf((samples[i] - f.mu) / f.sigma);
    f.max_cdf_dev = std::max({f.max_cdf_dev, static_cast<double>(i + 1) / n - c, c - static_cast<double>(i) / n});
  }
  return f;
}

std::size_t FiringPattern::count() const {
  return static_cast<std::size_t>(std::count(fired.begin(), fired.end(), std::uint8_t{1}));
}

namespace {

Tensor as_batch(const Network& net, const Tensor& x) {
  if (x.size() != net.spec().input_size())
    fail(ErrorCode::ShapeMismatch, "expected one sample of " + std::to_string(net.spec().input_size()) + " values");
  Shape s{1};
  s.insert(s.end(), net.spec().input_shape.begin(), net.spec().input_shape.end());
  return x.reshaped(s);
}

std::pair<FiringPattern, std::vector<double>> pattern_and_output(const Network& net, const Tensor& x) {
  const Trace tr = net.forward(as_batch(net, x), Mode::Eval);
  FiringPattern p;
  p.min_margin = std::numeric_limits<double>::infinity();
  const double vth = net.spec().lif.v_th;
  for (const LayerTrace& lt : tr.layers)
    for (double u : lt.u.data()) {
      const double ub = u - vth;
      p.fired.push_back(ub >= 0.0 ? 1 : 0);
      p.min_margin = std::min(p.min_margin, std::abs(ub));
    }
  return {std::move(p), tr.logits.values()};
}

}  // namespace

FiringPattern firing_pattern(const Network& net, const Tensor& x) { return pattern_and_output(net, x).first; }

std::vector<double> network_output(const Network& net, const Tensor& x) { return pattern_and_output(net, x).second; }

CellAffine extract_affine(const Network& net, const Tensor& x, double probe_scale, const Rng& rng,
                          std::size_t residual_checks) {
  require(probe_scale > 0.0, "extract_affine: probe scale must be > 0");
  const std::size_t n = net.spec().input_size(), m = net.spec().classes;
  Tensor x0 = x.reshaped({n});
  auto [pattern, f0] = pattern_and_output(net, x0);
  CellAffine cell;
  cell.pattern = pattern;
  cell.w = Tensor({m, n});
  cell.b.assign(m, 0.0);
  if (pattern.min_margin < kBoundaryMargin) {
    cell.boundary = true;
    return cell;
  }

  double h = probe_scale;
  for (; h >= kBoundaryMargin; h *= 0.5) {
    bool inside = true;
    for (std::size_t j = 0; j < n && inside; ++j)
      for (double s : {1.0, -1.0}) {
        Tensor xp = x0;
        xp[j] += s * h;
        if (!(firing_pattern(net, xp) == pattern)) {
          inside = false;
          break;
        }
      }
    if (inside) break;
  }
  if (h < kBoundaryMargin) {
    cell.boundary = true;
    return cell;
  }
  cell.probe_scale = h;
  for (std::size_t j = 0; j < n; ++j) {
    Tensor xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    const auto fp = network_output(net, xp), fm = network_output(net, xm);
    for (std::size_t i = 0; i < m; ++i) cell.w.at(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  for (std::size_t i = 0; i < m; ++i) {
    double wx = 0.0;
    for (std::size_t j = 0; j < n; ++j) wx += cell.w.at(i, j) * x0[j];
    cell.b[i] = f0[i] - wx;
  }

  Rng r = rng.substream(Stream::Probe, 1);
  for (std::size_t tries = 0; tries < residual_checks * 10 && cell.checks < residual_checks; ++tries) {
    Tensor xp = x0;
    for (std::size_t j = 0; j < n; ++j) xp[j] += r.uniform(-h, h);
    auto [pp, fp] = pattern_and_output(net, xp);
    if (!(pp == pattern) || pp.min_margin < kBoundaryMargin) continue;
    for (std::size_t i = 0; i < m; ++i) {
      double pred = cell.b[i];
      for (std::size_t j = 0; j < n; ++j) pred += cell.w.at(i, j) * xp[j];
      cell.residual = std::max(cell.residual, std::abs(fp[i] - pred));
    }
    ++cell.checks;
  }
  return cell;
}

double opnorm_inf_to_2(const Tensor& w) {
  if (w.rank() != 2) fail(ErrorCode::ShapeMismatch, "opnorm: expected a matrix");
  const std::size_t m = w.dim(0), n = w.dim(1);
  if (n > 20) fail(ErrorCode::InvalidArgument, "opnorm: exact mode supports at most 20 columns");
  if (n == 0 || m == 0) return 0.0;
  // Gray-code walk over sign vectors with the last sign fixed (delta and -delta
  // give the same norm); the winning vertex is re-evaluated from scratch.
  std::vector<double> delta(n, 1.0), v(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i] += w.at(i, j);
  auto norm2 = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (double e : a) s += e * e;
    return s;
  };
  double best = norm2(v);
  std::uint64_t best_code = 0;
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t k = 1; k < count; ++k) {
    const auto j = static_cast<std::size_t>(std::countr_zero(k));
    delta[j] = -delta[j];
    for (std::size_t i = 0; i < m; ++i) v[i] += 2.0 * delta[j] * w.at(i, j);
    const double s = norm2(v);
    if (s > best) {
      best = s;
      best_code = k ^ (k >> 1);
    }
  }
  std::vector<double> exact(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) exact[i] += ((best_code >> j) & 1U ? -1.0 : 1.0) * w.at(i, j);
  return std::sqrt(norm2(exact));
}

OpNormBounds opnorm_inf_to_2_bounds(const Tensor& w, const Rng& rng, std::size_t samples) {
  if (w.rank() != 2) fail(ErrorCode::ShapeMismatch, "opnorm: expected a matrix");
  const std::size_t m = w.dim(0), n = w.dim(1);
  OpNormBounds b;
  double fro = 0.0;
  for (double v : w.data()) fro += v * v;
  b.upper = std::sqrt(static_cast<double>(n) * fro);
  if (n <= 20) {
    b.lower = opnorm_inf_to_2(w);
    b.exact = true;
    return b;
  }
  Rng r = rng.substream(Stream::Probe, 2);
  for (std::size_t s = 0; s < samples; ++s) {
    double acc = 0.0;
    std::vector<double> v(m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (r.next_u64() >> 63) ? 1.0 : -1.0;
      for (std::size_t i = 0; i < m; ++i) v[i] += d * w.at(i, j);
    }
    for (double e : v) acc += e * e;
    b.lower = std::max(b.lower, std::sqrt(acc));
  }
  return b;
}

SensitivityReport sensitivity_bound_check(const Network& net, const Tensor& x, double epsilon, std::size_t n_dirs,
                                          const Rng& rng) {
  require(epsilon >= 0.0, "sensitivity: epsilon must be >= 0");
  const std::size_t n = net.spec().input_size();
  require(n <= 10, "sensitivity: input dimension must be <= 10");
  const Tensor x0 = x.reshaped({n});
  auto [p0, f0] = pattern_and_output(net, x0);

  SensitivityReport rep;
  rep.epsilon = epsilon;
  rep.directions = n_dirs;
  std::map<std::vector<std::uint8_t>, Tensor> cells;  // pattern -> first point reached
  cells.emplace(p0.fired, x0);
  std::vector<double> sens(n_dirs, 0.0);
  Rng r = rng.substream(Stream::Probe, 0);
  for (std::size_t k = 0; k < n_dirs; ++k) {
    Tensor xp = x0;
    for (std::size_t j = 0; j < n; ++j) xp[j] += epsilon * r.uniform(-1.0, 1.0);
    auto [pp, fp] = pattern_and_output(net, xp);
    double s = 0.0;
    for (std::size_t i = 0; i < fp.size(); ++i) s += (fp[i] - f0[i]) * (fp[i] - f0[i]);
    sens[k] = s;
    rep.max_sensitivity = std::max(rep.max_sensitivity, s);
    if (!(pp == p0)) ++rep.cell_changes;
    cells.emplace(pp.fired, xp);
  }

  rep.cells = cells.size();
  const double probe = std::max(epsilon * 0.1, 1e-6);
  std::size_t idx = 0;
  for (const auto& [bits, point] : cells) {
    const CellAffine c = extract_affine(net, point, probe, rng.substream(Stream::Probe, 100 + idx++));
    if (c.boundary) {
      ++rep.boundary_cells;
      continue;
    }
    rep.max_residual = std::max(rep.max_residual, c.residual);
    rep.max_opnorm = std::max(rep.max_opnorm, opnorm_inf_to_2(c.w));
  }
  rep.bound = epsilon * epsilon * rep.max_opnorm * rep.max_opnorm;

  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < n_dirs; ++k) {
    const double margin = rep.bound - sens[k];
    if (sens[k] > rep.bound + kSensitivityTolerance) ++rep.violations;
    lo = k == 0 ? margin : std::min(lo, margin);
    hi = k == 0 ? margin : std::max(hi, margin);
  }
  constexpr std::size_t kBins = 10;
  const double width = hi > lo ? (hi - lo) / kBins : 1.0;
  for (std::size_t b = 0; b <= kBins; ++b) rep.margin_edges.push_back(lo + width * static_cast<double>(b));
  rep.margin_hist.assign(kBins, 0);
  for (std::size_t k = 0; k < n_dirs; ++k) {
    const auto b = static_cast<std::size_t>((rep.bound - sens[k] - lo) / width);
    ++rep.margin_hist[std::min(b, kBins - 1)];
  }
  return rep;
}

}  // namespace spikeguard
