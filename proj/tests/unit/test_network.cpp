#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../support/oracles.hpp"
#include "spikeguard/error.hpp"
#include "spikeguard/network.hpp"

using namespace spikeguard;

namespace {

ModelSpec small_dense() {
  ModelSpec s;
  s.input_shape = {3};
  s.hidden = {{LayerKind::Dense, 4, true}, {LayerKind::Dense, 5, false}};
  s.classes = 3;
  s.timesteps = 2;
  return s;
}

}  // namespace

TEST_CASE("initialization is seeded and bounded by the fan-in") {
  const Network a = Network::init(small_dense(), 7), b = Network::init(small_dense(), 7), c = Network::init(small_dense(), 8);
  CHECK(a.hidden(0).weight == b.hidden(0).weight);
  CHECK_FALSE(a.hidden(0).weight == c.hidden(0).weight);
  for (double w : a.hidden(0).weight.values()) CHECK(std::abs(w) <= 1.0 / std::sqrt(3.0));
  for (double w : a.readout_weight().values()) CHECK(std::abs(w) <= 1.0 / std::sqrt(5.0));
  CHECK(a.parameter_names() == std::vector<std::string>{"hidden0.weight", "hidden0.bias", "hidden0.tdbn.lambda",
                                                        "hidden0.tdbn.beta", "hidden1.weight", "hidden1.bias",
                                                        "readout.weight", "readout.bias"});
  CHECK(a.parameters().size() == a.parameter_names().size());
}

TEST_CASE("forward shapes and logits are the mean readout over time") {
  const Network net = Network::init(small_dense(), 1);
  const Tensor x({2, 3}, {0.1, 0.5, 0.9, 0.3, 0.3, 0.3});
  const Trace tr = net.forward(x, Mode::Train);
  CHECK(tr.encoded.shape() == Shape{2, 2, 3});
  CHECK(tr.layers.size() == 2);
  CHECK(tr.layers[1].spikes.shape() == Shape{2, 2, 5});
  CHECK(tr.logits_t.shape() == Shape{2, 2, 3});
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(tr.logits.at(b, k) == doctest::Approx((tr.logits_t[(0 * 2 + b) * 3 + k] + tr.logits_t[(1 * 2 + b) * 3 + k]) / 2));
  for (double s : tr.layers[0].spikes.values()) CHECK((s == 0.0 || s == 1.0));
}

TEST_CASE("spike trains follow the LIF recursion on the recorded drive") {
  ModelSpec s = small_dense();
  s.lif.tau = 0.6;
  const Network net = Network::init(s, 2);
  const Trace tr = net.forward(Tensor({1, 3}, {0.9, 0.1, 0.4}), Mode::Train);
  const auto& l = tr.layers[0];
  for (std::size_t j = 0; j < 4; ++j) {
    double u = 0.0, o = 0.0;
    for (std::size_t t = 0; t < 2; ++t) {
      u = 0.6 * (u - o) + l.drive[t * 4 + j];
      o = u >= 1.0 ? 1.0 : 0.0;
      CHECK(l.u[t * 4 + j] == doctest::Approx(u));
      CHECK(l.spikes[t * 4 + j] == o);
    }
  }
}

TEST_CASE("convolutional layers match the direct-loop convolution") {
  ModelSpec s;
  s.input_shape = {2, 4, 4};
  s.hidden = {{LayerKind::Conv, 3, false}};
  s.classes = 2;
  s.timesteps = 1;
  const Network net = Network::init(s, 3);
  Rng rng(4);
  const Tensor x = uniform(rng, {1, 2, 4, 4}, 0.0, 1.0);
  const Trace tr = net.forward(x, Mode::Train);
  const Tensor ref = oracle::conv3x3(x.reshaped({2, 4, 4}), net.hidden(0).weight);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 16; ++i)
      CHECK(tr.layers[0].current[c * 16 + i] == doctest::Approx(ref[c * 16 + i] + net.hidden(0).bias[c]));
}

TEST_CASE("eval mode is deterministic and uses running statistics") {
  Network net = Network::init(small_dense(), 5);
  const Tensor x({2, 3}, {0.2, 0.4, 0.6, 0.8, 0.1, 0.3});
  CHECK(net.logits(x) == net.logits(x));
  const Trace tr = net.forward(x, Mode::Train);
  net.update_running_stats(tr);
  CHECK(net.hidden(0).bn->running_mean[0] != 0.0);
}

TEST_CASE("invalid specs and inputs are rejected") {
  ModelSpec s = small_dense();
  s.classes = 1;
  CHECK_THROWS_AS(Network::init(s, 1), Error);
  s = small_dense();
  s.hidden[0].kind = LayerKind::Conv;
  CHECK_THROWS_AS(Network::init(s, 1), Error);
  const Network net = Network::init(small_dense(), 1);
  CHECK_THROWS_AS(net.forward(Tensor({2, 4}), Mode::Eval), Error);
  ModelSpec p = small_dense();
  p.encoding = Encoding::Poisson;
  CHECK_THROWS_AS(Network::init(p, 1).forward(Tensor({1, 3}), Mode::Eval), Error);
  CHECK(batch_rows(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}), {2, 0}).values() == std::vector<double>{5, 6, 1, 2});
}
