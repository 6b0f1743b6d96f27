#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spikeguard/error.hpp"
#include "spikeguard/theory.hpp"

using namespace spikeguard;

namespace {

// Brute-force max over sign vectors, independent of the Gray-code walk.
double opnorm_brute(const Tensor& w) {
  const std::size_t m = w.dim(0), n = w.dim(1);
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j) r += w.at(i, j) * ((mask >> j) & 1 ? 1.0 : -1.0);
      s += r * r;
    }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

Network small_net(std::uint64_t seed) {
  ModelSpec s;
  s.input_shape = {3};
  s.hidden = {{LayerKind::Dense, 4, false}};
  s.classes = 2;
  s.timesteps = 2;
  return Network::init(s, seed);
}

}  // namespace

TEST_CASE("cumulative decay") {
  CHECK(cumulative_decay(1.0, 5) == 5.0);
  CHECK(cumulative_decay(0.5, 3) == 1.75);
  CHECK(cumulative_decay(0.3, 1) == 1.0);
}

TEST_CASE("closed-form moments") {
  Theorem1Params p;
  p.v_th = 1e9;
  Theorem1Moments m = theorem1_closed_form(p);
  for (double v : m.mean) CHECK(v == 0.0);
  CHECK(m.var[2] == 3.0);
  p.tau = 0.5;
  m = theorem1_closed_form(p);
  CHECK(m.var[1] == 1.25);
  p.tau = 0.5;
  p.beta = 0.2;
  p.v_th = 1.0;
  p.rates = std::vector<double>(8, 0.5);
  m = theorem1_closed_form(p);
  CHECK(m.reset_shift[0] == 0.0);
  CHECK(m.reset_shift[2] == doctest::Approx(0.25 * 0.5 + 0.5 * 0.5));
  CHECK(m.mean[2] == doctest::Approx(0.2 * 1.75 - m.reset_shift[2]));
}

TEST_CASE("monte carlo agrees with the closed form") {
  Theorem1Params p;
  p.v_th = 1e9;
  const std::size_t n = 20000;
  const Theorem1Sample s = theorem1_monte_carlo(Rng(3), p, n);
  const double se4 = 4.0 * std::sqrt(2.0 / static_cast<double>(n - 1));
  CHECK(std::abs(s.var[3] - 4.0) <= 5.0 * se4);
  for (double r : s.rates) CHECK(r == 0.0);
  p.v_th = 1.0;
  const Theorem1Sample f = theorem1_monte_carlo(Rng(4), p, n);
  p.rates = f.rates;
  const Theorem1Moments m = theorem1_closed_form(p);
  for (std::size_t t = 0; t < 8; ++t)
    CHECK(std::abs(f.mean[t] - m.mean[t]) <= 5.0 * std::sqrt(f.var[t] / static_cast<double>(n)));
  const Theorem1Sample again = theorem1_monte_carlo(Rng(4), p, n);
  CHECK(again.mean == f.mean);
  CHECK_THROWS_AS(theorem1_monte_carlo(Rng(1), p, 0), Error);
}

TEST_CASE("chi-square quantile approximation") {
  // Reference quantiles of chi2(99): 0.005 -> 66.510, 0.995 -> 138.987.
  CHECK(chi2_quantile_wh(99.0, -2.5758293035489) == doctest::Approx(66.510).epsilon(2e-3));
  CHECK(chi2_quantile_wh(99.0, 2.5758293035489) == doctest::Approx(138.987).epsilon(2e-3));
}

TEST_CASE("gaussian fit") {
  Rng rng(5);
  std::vector<double> n(100000), bi(100000);
  for (auto& v : n) v = rng.normal();
  for (std::size_t i = 0; i < bi.size(); ++i) bi[i] = (i % 2 ? 5.0 : -5.0) + 0.1 * rng.normal();
  CHECK(gaussian_fit(n).max_cdf_dev <= 0.01);
  CHECK(gaussian_fit(bi).max_cdf_dev > 0.2);
  const GaussianFit c = gaussian_fit(std::vector<double>(200, 2.0));
  CHECK(c.degenerate);
  CHECK(c.sigma == 0.0);
}

TEST_CASE("firing patterns") {
  Network zero = small_net(1);
  for (double& w : zero.hidden(0).weight.data()) w = 0.0;
  for (double& b : zero.hidden(0).bias.data()) b = 0.0;
  CHECK(firing_pattern(zero, Tensor({3}, 0.5)).count() == 0);

  ModelSpec s;
  s.input_shape = {1};
  s.hidden = {{LayerKind::Dense, 1, false}};
  s.classes = 2;
  s.timesteps = 1;
  Network one = Network::init(s, 1);
  one.hidden(0).weight[0] = 1.0;
  one.hidden(0).bias[0] = 0.0;
  CHECK(firing_pattern(one, Tensor({1}, 1.0)).count() == 1);
  CHECK(firing_pattern(one, Tensor({1}, 0.999)).count() == 0);

  const Network net = small_net(2);
  const Tensor x({3}, {0.3, 0.6, 0.2});
  const FiringPattern p = firing_pattern(net, x);
  Tensor y = x;
  const double d = 0.5 * p.min_margin / 10.0;  // each input moves each potential by at most |w| d
  for (double& v : y.data()) v += d;
  CHECK(firing_pattern(net, y) == p);
}

TEST_CASE("affine extraction") {
  const Network net = small_net(3);
  const Tensor x({3}, {0.4, 0.5, 0.6});
  const CellAffine a = extract_affine(net, x, 1e-3, Rng(1));
  CHECK_FALSE(a.boundary);
  CHECK(a.residual <= 1e-9);
  CHECK(a.w.shape() == Shape{2, 3});

  Network dead = small_net(4);
  for (double& b : dead.hidden(0).bias.data()) b = -100.0;
  const CellAffine z = extract_affine(dead, x, 1e-3, Rng(2));
  CHECK(z.pattern.count() == 0);
  CHECK(max_abs(z.w) == 0.0);
}

TEST_CASE("inf-to-2 operator norm") {
  CHECK(opnorm_inf_to_2(identity(2)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(opnorm_inf_to_2(Tensor::matrix({{1, 1}})) == 2.0);
  CHECK(opnorm_inf_to_2(Tensor({3, 4})) == 0.0);
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    const Tensor w = gaussian(rng, {1 + rng.below(4), 1 + rng.below(9)}, 0.0, 1.0);
    CHECK(opnorm_inf_to_2(w) == doctest::Approx(opnorm_brute(w)).epsilon(1e-12));
    const OpNormBounds b = opnorm_inf_to_2_bounds(w, Rng(7));
    CHECK(b.exact);
    CHECK(b.lower == doctest::Approx(opnorm_brute(w)).epsilon(1e-12));
  }
  const Tensor wide = gaussian(rng, {3, 24}, 0.0, 1.0);
  const OpNormBounds b = opnorm_inf_to_2_bounds(wide, Rng(8));
  CHECK_FALSE(b.exact);
  CHECK(b.lower <= b.upper);
  CHECK_THROWS_AS(opnorm_inf_to_2(wide), Error);
}

TEST_CASE("sensitivity check") {
  const Network net = small_net(9);
  const Tensor x({3}, {0.2, 0.5, 0.8});
  const SensitivityReport z = sensitivity_bound_check(net, x, 0.0, 100, Rng(1));
  CHECK(z.max_sensitivity == 0.0);
  CHECK(z.violations == 0);
  const FiringPattern p = firing_pattern(net, x);
  const SensitivityReport in = sensitivity_bound_check(net, x, 1e-3 * p.min_margin, 500, Rng(2));
  CHECK(in.cell_changes == 0);
  CHECK(in.violations == 0);
}
