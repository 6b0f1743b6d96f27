#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../support/oracles.hpp"
#include "spikeguard/rng.hpp"
#include "spikeguard/tdbn.hpp"

using namespace spikeguard;

TEST_CASE("two-value channel normalizes to -1 and 1") {
  TdbnParams p = TdbnParams::init(1, 1.0, 1.0);
  p.eps = 0.0;
  const auto r = tdbn_forward(p, Tensor({1, 2, 1}, {1.0, 3.0}), true);
  CHECK(r.out[0] == doctest::Approx(-1.0));
  CHECK(r.out[1] == doctest::Approx(1.0));
}

TEST_CASE("zero scale collapses to the shift") {
  TdbnParams p = TdbnParams::init(2, 1.0, 1.0);
  p.lambda = Tensor({2});
  p.beta = Tensor({2}, {0.3, -0.2});
  Rng rng(1);
  const auto r = tdbn_forward(p, gaussian(rng, {3, 4, 2}, 1.0, 2.0), true);
  for (std::size_t i = 0; i < r.out.size(); ++i) CHECK(r.out[i] == (i % 2 == 0 ? 0.3 : -0.2));
}

TEST_CASE("training output has mean beta and std |lambda| alpha v_th") {
  TdbnParams p = TdbnParams::init(3, 0.7, 1.3);
  p.lambda = Tensor({3}, {1.0, -2.0, 0.5});
  p.beta = Tensor({3}, {0.0, 1.0, -1.0});
  p.eps = 1e-12;
  Rng rng(2);
  const Tensor in = gaussian(rng, {4, 50, 3, 2, 2}, 3.0, 5.0);
  const auto r = tdbn_forward(p, in, true);
  const std::size_t per_c = 4, C = 3, n = 4 * 50 * 4;
  for (std::size_t c = 0; c < C; ++c) {
    double m = 0.0, v = 0.0;
    for (std::size_t tb = 0; tb < 200; ++tb)
      for (std::size_t s = 0; s < per_c; ++s) m += r.out[(tb * C + c) * per_c + s];
    m /= static_cast<double>(n);
    for (std::size_t tb = 0; tb < 200; ++tb)
      for (std::size_t s = 0; s < per_c; ++s) {
        const double d = r.out[(tb * C + c) * per_c + s] - m;
        v += d * d;
      }
    CHECK(m == doctest::Approx(p.beta[c]).epsilon(1e-6).scale(1.0));
    CHECK(std::sqrt(v / static_cast<double>(n)) == doctest::Approx(std::abs(p.lambda[c]) * 0.7 * 1.3).epsilon(1e-6));
  }
}

TEST_CASE("backward matches finite differences through the batch statistics") {
  TdbnParams p = TdbnParams::init(2, 1.0, 1.0);
  p.lambda = Tensor({2}, {1.5, -0.7});
  p.beta = Tensor({2}, {0.2, 0.1});
  Rng rng(3);
  const Tensor in = gaussian(rng, {2, 3, 2}, 0.0, 1.0), w = gaussian(rng, {2, 3, 2}, 0.0, 1.0);
  auto loss = [&](const TdbnParams& pp, const Tensor& x) {
    const auto r = tdbn_forward(pp, x, true);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * r.out[i];
    return s;
  };
  const auto fwd = tdbn_forward(p, in, true);
  const TdbnGrad g = tdbn_backward(p, fwd.cache, w);
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double fd =
        oracle::central_difference([&](double v) { Tensor x = in; x[i] = v; return loss(p, x); }, in[i], 1e-6);
    CHECK(oracle::relative_error(g.input[i], fd, 1e-7) <= 1e-5);
  }
  for (std::size_t c = 0; c < 2; ++c) {
    const double fl = oracle::central_difference(
        [&](double v) { TdbnParams q = p; q.lambda[c] = v; return loss(q, in); }, p.lambda[c], 1e-6);
    const double fb = oracle::central_difference(
        [&](double v) { TdbnParams q = p; q.beta[c] = v; return loss(q, in); }, p.beta[c], 1e-6);
    CHECK(oracle::relative_error(g.lambda[c], fl) <= 1e-6);
    CHECK(oracle::relative_error(g.beta[c], fb) <= 1e-6);
  }
}

TEST_CASE("eval mode uses running statistics") {
  TdbnParams p = TdbnParams::init(1, 1.0, 1.0);
  p.running_mean = Tensor({1}, {2.0});
  p.running_var = Tensor({1}, {4.0 - p.eps});
  const auto r = tdbn_forward(p, Tensor({1, 1, 1}, {6.0}), false);
  CHECK(r.out[0] == doctest::Approx(2.0));
  const auto t = tdbn_forward(p, Tensor({1, 2, 1}, {0.0, 2.0}), true);
  tdbn_update_running(p, t.cache);
  CHECK(p.running_mean[0] == doctest::Approx(0.9 * 2.0 + 0.1 * 1.0));
}
