#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../support/oracles.hpp"
#include "spikeguard/error.hpp"
#include "spikeguard/rng.hpp"
#include "spikeguard/tensor.hpp"

using namespace spikeguard;

TEST_CASE("matmul examples") {
  CHECK(matmul(identity(2), Tensor::matrix({{1}, {2}})) == Tensor::matrix({{1}, {2}}));
  CHECK(matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{0}, {0}})) == Tensor::matrix({{0}, {0}}));
  CHECK(matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{1}, {1}})) == Tensor::matrix({{3}, {7}}));
  CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({2, 3})), Error);
}

TEST_CASE("transposed products agree with explicit transposes") {
  Rng rng(1);
  const Tensor a = gaussian(rng, {3, 4}, 0.0, 1.0), b = gaussian(rng, {3, 5}, 0.0, 1.0), c = gaussian(rng, {5, 4}, 0.0, 1.0);
  auto transpose = [](const Tensor& m) {
    Tensor t({m.dim(1), m.dim(0)});
    for (std::size_t i = 0; i < m.dim(0); ++i)
      for (std::size_t j = 0; j < m.dim(1); ++j) t.at(j, i) = m.at(i, j);
    return t;
  };
  CHECK(max_abs_diff(matmul_tn(a, b), matmul(transpose(a), b)) <= 1e-14);
  CHECK(max_abs_diff(matmul_nt(a, c), matmul(a, transpose(c))) <= 1e-14);
}

TEST_CASE("conv2d examples") {
  Rng rng(3);
  const Tensor x = gaussian(rng, {1, 4, 4}, 0.0, 1.0);
  CHECK(max_abs(conv2d(x, Tensor({1, 1, 3, 3}))) == 0.0);
  Tensor id({1, 1, 3, 3});
  id[4] = 1.0;
  CHECK(conv2d(x, id) == x);
  const Tensor k = gaussian(rng, {1, 1, 3, 3}, 0.0, 1.0);
  CHECK(max_abs_diff(conv2d(x, k), oracle::conv3x3(x, k)) <= 1e-14);
  const Tensor x3 = gaussian(rng, {2, 5, 3}, 0.0, 1.0), k3 = gaussian(rng, {3, 2, 3, 3}, 0.0, 1.0);
  CHECK(max_abs_diff(conv2d(x3, k3), oracle::conv3x3(x3, k3)) <= 1e-13);
}

TEST_CASE("conv2d backward matches finite differences") {
  Rng rng(4);
  const Tensor x = gaussian(rng, {2, 4, 3}, 0.0, 1.0), k = gaussian(rng, {2, 2, 3, 3}, 0.0, 1.0);
  const Tensor w = gaussian(rng, {2, 4, 3}, 0.0, 1.0);  // loss = sum(w * conv(x, k))
  auto loss = [&](const Tensor& xx, const Tensor& kk) {
    const Tensor y = oracle::conv3x3(xx, kk);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  const Tensor dx = conv2d_backward_input(w, k);
  Tensor dk(k.shape());
  conv2d_backward_kernel(x, w, dk);
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fd = oracle::central_difference([&](double v) { Tensor t = x; t[i] = v; return loss(t, k); }, x[i], h);
    CHECK(oracle::relative_error(dx[i], fd, 1e-8) <= 1e-6);
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double fd = oracle::central_difference([&](double v) { Tensor t = k; t[i] = v; return loss(x, t); }, k[i], h);
    CHECK(oracle::relative_error(dk[i], fd, 1e-8) <= 1e-6);
  }
}

TEST_CASE("gaussian sampling") {
  Rng a(9);
  const Tensor flat = gaussian(a, {5, 5}, 2.5, 0.0);
  for (double v : flat.values()) CHECK(v == 2.5);
  Rng b(10);
  const Tensor big = gaussian(b, {1000000}, 0.0, 1.0);
  CHECK(std::abs(sum(big) / 1e6) < 0.005);
  Rng c1(11), c2(11);
  CHECK(gaussian(c1, {64}, 0.0, 1.0) == gaussian(c2, {64}, 0.0, 1.0));
}

TEST_CASE("rng streams") {
  Rng a(5);
  const Rng s1 = a.substream(Stream::Poisson, 1), s2 = a.substream(Stream::Poisson, 2);
  CHECK(s1.key() != s2.key());
  CHECK(a.substream(Stream::Poisson, 1).key() == s1.key());
  Rng r(5);
  r.next_u64();
  r.next_u64();
  Rng copy = Rng::from_state(r.key(), r.counter());
  CHECK(copy.next_u64() == r.next_u64());
  Rng u(6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK((v >= 0.0 && v < 1.0));
    CHECK(u.below(7) < 7);
  }
}

TEST_CASE("reshape, slice and shape errors") {
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.reshaped({3, 2}).values() == t.values());
  CHECK_THROWS_AS(t.reshaped({4, 2}), Error);
  CHECK(t.slice(1, 1).values() == std::vector<double>{4, 5, 6});
  CHECK_THROWS_AS(t.slice(1, 2), Error);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), Error);
  Tensor n({1}, {std::nan("")});
  CHECK_FALSE(n.all_finite());
}
