#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spikeguard/checkpoint.hpp"
#include "spikeguard/error.hpp"
#include "spikeguard/train.hpp"

using namespace spikeguard;

namespace {

ModelSpec blob_model() {
  ModelSpec s;
  s.input_shape = {2};
  s.hidden = {{LayerKind::Dense, 16, true}};
  s.classes = 2;
  s.timesteps = 4;
  return s;
}

Dataset blobs(std::uint64_t seed, std::size_t n) {
  Dataset d = synth_blobs(Rng(seed), n, 2, 2, 10.0);
  squash_unit_interval(d, 14.0);
  return d;
}

TrainConfig quick(double eta, std::size_t epochs = 5) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 32;
  c.eta = eta;
  return c;
}

}  // namespace

TEST_CASE("cosine schedule") {
  CHECK(cosine_lr(0.1, 0, 10) == 0.1);
  CHECK(cosine_lr(0.1, 5, 10) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(cosine_lr(0.1, 10, 10) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("training separates blobs and logs the observables") {
  const Dataset tr = blobs(1, 400), te = blobs(2, 200);
  const TrainResult r = train(blob_model(), quick(0.05), tr, &te, 3);
  REQUIRE(r.metrics.size() == 5);
  CHECK(r.metrics.back().test_accuracy >= 0.95);
  CHECK(r.metrics.front().lr == 0.1);
  CHECK(r.metrics.back().layer_mu.size() == 1);
  CHECK(r.metrics.back().layer_mu[0].size() == 4);
  CHECK(r.metrics.back().layer_sigma[0][0] > 0.0);
  CHECK(r.metrics.back().mean_omega > 0.0);
  CHECK(r.checkpoint.epoch == 5);
  CHECK(clean_accuracy(r.checkpoint.net, te, 64) == doctest::Approx(r.metrics.back().test_accuracy));
  const std::string csv = metrics_csv(r.metrics);
  CHECK(csv.find("mean_omega") != std::string::npos);
  CHECK(csv.find("mu_l0_t3") != std::string::npos);
  CHECK(metrics_json(r.metrics).size() == 5);
}

TEST_CASE("training is deterministic") {
  const Dataset tr = blobs(1, 200);
  const auto a = train(blob_model(), quick(0.05, 2), tr, nullptr, 9);
  const auto b = train(blob_model(), quick(0.05, 2), tr, nullptr, 9);
  CHECK(serialize_checkpoint(a.checkpoint) == serialize_checkpoint(b.checkpoint));
}

TEST_CASE("eta runs share the initialization and differ after the first step") {
  const Dataset tr = blobs(1, 32);
  CHECK(serialize_checkpoint({Network::init(blob_model(), 4)}) == serialize_checkpoint({Network::init(blob_model(), 4)}));
  TrainConfig one = quick(0.0, 1);
  one.batch_size = 32;
  const auto a = train(blob_model(), one, tr, nullptr, 4);
  one.eta = 0.05;
  const auto b = train(blob_model(), one, tr, nullptr, 4);
  CHECK_FALSE(a.checkpoint.net.hidden(0).bn->beta == b.checkpoint.net.hidden(0).bn->beta);
  CHECK(a.metrics[0].task_loss == b.metrics[0].task_loss);
}

TEST_CASE("adversarial training runs") {
  const Dataset tr = blobs(1, 64);
  TrainConfig c = quick(0.0, 1);
  c.adversarial = true;
  const auto r = train(blob_model(), c, tr, nullptr, 1);
  CHECK(std::isfinite(r.metrics[0].task_loss));
}

TEST_CASE("non-finite inputs abort with a numeric error") {
  Dataset tr = blobs(1, 32);
  tr.images[3] = std::nan("");
  try {
    train(blob_model(), quick(0.0, 1), tr, nullptr, 1);
    FAIL("expected a numeric failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
  }
}

TEST_CASE("mismatched data is rejected") {
  const Dataset tr = synth_blobs(Rng(1), 20, 2, 3, 1.0);
  CHECK_THROWS_AS(train(blob_model(), quick(0.0, 1), tr, nullptr, 1), Error);
  Dataset bad = blobs(1, 20);
  bad.labels[0] = 5;
  CHECK_THROWS_AS(train(blob_model(), quick(0.0, 1), bad, nullptr, 1), Error);
}
