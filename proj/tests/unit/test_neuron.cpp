#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spikeguard/error.hpp"
#include "spikeguard/neuron.hpp"
#include "spikeguard/surrogate.hpp"

using namespace spikeguard;

TEST_CASE("soft-reset LIF steps") {
  LifParams p;
  auto s = LifLayerState::zeros({1});
  Tensor o = lif_step(s, p, Tensor({1}, {0.6}));
  CHECK(s.u[0] == doctest::Approx(0.6));
  CHECK(o[0] == 0.0);
  o = lif_step(s, p, Tensor({1}, {0.6}));
  CHECK(s.u[0] == doctest::Approx(1.2));
  CHECK(o[0] == 1.0);
  CHECK(s.carried_potential(p)[0] == doctest::Approx(0.2));
}

TEST_CASE("zero decay is memoryless") {
  LifParams p;
  p.tau = 0.0;
  auto s = LifLayerState::zeros({1});
  s.u[0] = -7.0;
  const Tensor o = lif_step(s, p, Tensor({1}, {2.0}));
  CHECK(s.u[0] == 2.0);
  CHECK(o[0] == 1.0);
}

TEST_CASE("threshold crossing at equality fires") {
  LifParams p;
  auto s = LifLayerState::zeros({1});
  CHECK(lif_step(s, p, Tensor({1}, {1.0}))[0] == 1.0);
}

TEST_CASE("hard reset returns to zero") {
  LifParams p;
  p.reset = ResetMode::Hard;
  auto s = LifLayerState::zeros({1});
  lif_step(s, p, Tensor({1}, {1.7}));
  CHECK(s.carried_potential(p)[0] == 0.0);
  lif_step(s, p, Tensor({1}, {0.3}));
  CHECK(s.u[0] == doctest::Approx(0.3));
}

TEST_CASE("step records carry the surrogate slope") {
  LifParams p;
  auto s = LifLayerState::zeros({2});
  s.record = SurrogateSpec{};
  lif_step(s, p, Tensor({2}, {1.0, 0.25}));
  REQUIRE(s.trace.size() == 1);
  CHECK(s.trace[0].slope[0] == 1.0);
  CHECK(s.trace[0].slope[1] == doctest::Approx(0.25));
  CHECK(s.trace[0].u_bar[1] == doctest::Approx(-0.75));
}

TEST_CASE("surrogate examples") {
  const SurrogateSpec tri{SurrogateFamily::Triangle, 1.0};
  CHECK(tri(0.0) == 1.0);
  CHECK(tri(1.5) == 0.0);
  CHECK(SurrogateSpec{SurrogateFamily::Triangle, 0.5}(0.25) == 1.0);
  CHECK(SurrogateSpec{SurrogateFamily::Rectangular, 0.5}(0.5) == 1.0);
  CHECK(SurrogateSpec{SurrogateFamily::Sigmoid, 1.0}(0.0) == 0.25);
  CHECK(SurrogateSpec{SurrogateFamily::Superspike, 1.0}(1.0) == 0.25);
  CHECK(tri.window() == 1.0);
  const SurrogateSpec sig{SurrogateFamily::Sigmoid, 1.0};
  CHECK(sig(sig.window()) == doctest::Approx(0.01 * sig(0.0)).epsilon(1e-9));
  const Tensor g = surrogate_grad(tri, Tensor({3}, {-0.5, 0.0, 2.0}));
  CHECK(g.values() == std::vector<double>{0.5, 1.0, 0.0});
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((SurrogateSpec{SurrogateFamily::Triangle, 0.0}.validate()), Error);
  LifParams p;
  p.tau = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK(parse_surrogate_family("superspike") == SurrogateFamily::Superspike);
  CHECK_THROWS_AS(parse_reset_mode("none"), Error);
  auto s = LifLayerState::zeros({2});
  CHECK_THROWS_AS(lif_step(s, LifParams{}, Tensor({3})), Error);
}
