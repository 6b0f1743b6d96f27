#include "spikeguard/mpd.hpp"

#include <cmath>
#include <numbers>

#include "spikeguard/error.hpp"

namespace spikeguard {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 / 1.7724538509055160273;

double erf_series(double x) {
  // erf x = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (1*3*...*(2n+1)); all terms positive.
  const double x2 = x * x;
  double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= 2.0 * x2 / (2.0 * n + 1.0);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return kTwoOverSqrtPi * std::exp(-x2) * sum;
}

double erfc_continued_fraction(double x) {
  // erfc x = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0, modified Lentz.
  const double tiny = 1e-300;
  double f = x, c = x, d = 0.0;
  for (int n = 1; n < 500; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * f);
}

}  // namespace

double erf(double x) {
  if (std::isnan(x)) return x;
  const double a = std::abs(x);
  const double v = a < 2.0 ? erf_series(a) : 1.0 - erfc_continued_fraction(a);
  return x < 0.0 ? -v : v;
}

double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x >= 2.0) return erfc_continued_fraction(x);
  if (x <= -2.0) return 2.0 - erfc_continued_fraction(-x);
  return 1.0 - erf(x);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * erfc(-x / std::numbers::sqrt2); }

OverlapResult overlap(double mu, double sigma, double gamma, ErfFn erf_fn) {
  // Non-finite moments come from overflowing potentials, not from the caller.
  if (!std::isfinite(mu) || !std::isfinite(sigma)) fail(ErrorCode::Numeric, "overlap: non-finite mu or sigma");
  if (!(sigma > 0.0)) fail(ErrorCode::InvalidArgument, "overlap: sigma must be > 0");
  if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "overlap: gamma must be > 0");
  // Upper tail Q(x) = 1 - Phi(x); working on |mu| makes the result symmetric
  // and keeps both tails accurate.
  auto q = [erf_fn](double x) {
    return erf_fn ? 0.5 * (1.0 - erf_fn(x / std::numbers::sqrt2)) : 0.5 * erfc(x / std::numbers::sqrt2);
  };
  const double m = std::abs(mu);
  const double lo = (m - gamma) / sigma, hi = (m + gamma) / sigma;
  OverlapResult r;
  r.omega = lo >= 0.0 ? q(lo) - q(hi) : 1.0 - q(hi) - q(-lo);
  const double mp = mu + gamma, mm = mu - gamma;
  const double pp = normal_pdf(mp / sigma), pm = normal_pdf(mm / sigma);
  r.d_mu = (pp - pm) / sigma;
  r.d_sigma = (-mp * pp + mm * pm) / (sigma * sigma);
  return r;
}

namespace {

struct Layout {
  std::size_t T, B, C, spatial;
};

Layout layout_of(const Tensor& u) {
  if (u.rank() < 3) fail(ErrorCode::ShapeMismatch, "mpd: potentials must be [T, B, C, ...], got " + shape_str(u.shape()));
  std::size_t spatial = 1;
  for (std::size_t a = 3; a < u.rank(); ++a) spatial *= u.dim(a);
  const Layout l{u.dim(0), u.dim(1), u.dim(2), spatial};
  if (l.B * l.spatial == 0 || l.T * l.C == 0) fail(ErrorCode::InvalidArgument, "mpd: empty channel");
  return l;
}

}  // namespace

MpdStats mpd_stats(const std::vector<Tensor>& u_bar, double sigma_min) {
  require(sigma_min > 0.0, "mpd: sigma floor must be > 0");
  MpdStats s;
  for (const Tensor& u : u_bar) {
    const Layout l = layout_of(u);
    const std::size_t n = l.B * l.spatial;
    Tensor mu({l.T, l.C}), sd({l.T, l.C}), raw({l.T, l.C});
    for (std::size_t t = 0; t < l.T; ++t)
      for (std::size_t c = 0; c < l.C; ++c) {
        double acc = 0.0;
        for (std::size_t b = 0; b < l.B; ++b)
          for (std::size_t p = 0; p < l.spatial; ++p) acc += u[((t * l.B + b) * l.C + c) * l.spatial + p];
        const double mean = acc / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t b = 0; b < l.B; ++b)
          for (std::size_t p = 0; p < l.spatial; ++p) {
            const double d = u[((t * l.B + b) * l.C + c) * l.spatial + p] - mean;
            ss += d * d;
          }
        const double std_dev = std::sqrt(ss / static_cast<double>(n));
        mu.at(t, c) = mean;
        raw.at(t, c) = std_dev;
        sd.at(t, c) = std::max(std_dev, sigma_min);
      }
    s.mu.push_back(std::move(mu));
    s.sigma.push_back(std::move(sd));
    s.raw_sigma.push_back(std::move(raw));
    s.count.push_back(n);
  }
  return s;
}

std::vector<Tensor> shifted_potentials(const Trace& trace, double v_th) {
  std::vector<Tensor> out;
  for (const LayerTrace& lt : trace.layers) {
    Tensor u = lt.u;
    for (double& v : u.data()) v -= v_th;
    out.push_back(std::move(u));
  }
  return out;
}

MpdLoss mpd_sgr_loss(const std::vector<Tensor>& u_bar, const MpdStats& stats, double gamma, ErfFn erf_fn) {
  if (stats.mu.size() != u_bar.size()) fail(ErrorCode::InvalidArgument, "mpd: stats do not match the potentials");
  MpdLoss res;
  std::size_t triples = 0;
  for (const Tensor& m : stats.mu) triples += m.size();
  require(triples > 0, "mpd: no channels to regularize");
  const double inv_triples = 1.0 / static_cast<double>(triples);
  for (std::size_t li = 0; li < u_bar.size(); ++li) {
    const Tensor& u = u_bar[li];
    const Layout l = layout_of(u);
    if (stats.mu[li].shape() != Shape{l.T, l.C}) fail(ErrorCode::ShapeMismatch, "mpd: stats shape mismatch");
    const double n = static_cast<double>(stats.count[li]);
    Tensor d(u.shape());
    for (std::size_t t = 0; t < l.T; ++t)
      for (std::size_t c = 0; c < l.C; ++c) {
        const double mu = stats.mu[li].at(t, c), sigma = stats.sigma[li].at(t, c);
        const OverlapResult o = overlap(mu, sigma, gamma, erf_fn);
        res.loss += o.omega;
        const bool floored = sigma > stats.raw_sigma[li].at(t, c);
        const double a = o.d_mu / n * inv_triples;
        const double s = floored ? 0.0 : o.d_sigma / (n * sigma) * inv_triples;
        for (std::size_t b = 0; b < l.B; ++b)
          for (std::size_t p = 0; p < l.spatial; ++p) {
            const std::size_t i = ((t * l.B + b) * l.C + c) * l.spatial + p;
            d[i] = a + s * (u[i] - mu);
          }
      }
    res.d_u_bar.push_back(std::move(d));
  }
  res.loss *= inv_triples;
  return res;
}

double total_loss(double task_loss, double sgr_loss, double eta) {
  require(eta >= 0.0, "eta must be >= 0");
  return task_loss + eta * sgr_loss;
}

}  // namespace spikeguard
