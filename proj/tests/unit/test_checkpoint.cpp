#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spikeguard/checkpoint.hpp"
#include "spikeguard/error.hpp"

using namespace spikeguard;

namespace {

Checkpoint sample() {
  ModelSpec s;
  s.input_shape = {5};
  s.hidden = {{LayerKind::Dense, 4, true}, {LayerKind::Dense, 3, false}};
  s.classes = 3;
  Checkpoint ck{Network::init(s, 3), 7, 0x1234, 99};
  ck.net.hidden(0).bn->running_mean[1] = 0.25;
  return ck;
}

}  // namespace

TEST_CASE("serialization is byte stable") {
  const std::string a = serialize_checkpoint(sample());
  CHECK(a.substr(0, 8) == "SPKGRD01");
  const Checkpoint back = parse_checkpoint(a);
  CHECK(serialize_checkpoint(back) == a);
  CHECK(back.epoch == 7);
  CHECK(back.rng_key == 0x1234);
  CHECK(back.rng_counter == 99);
  CHECK(back.net.hidden(0).bn->running_mean[1] == 0.25);
  CHECK(static_cast<float>(back.net.hidden(1).weight[2]) == static_cast<float>(sample().net.hidden(1).weight[2]));
}

TEST_CASE("corrupt checkpoints are rejected") {
  std::string a = serialize_checkpoint(sample());
  std::string bad = a;
  bad[0] = 'X';
  CHECK_THROWS_AS(parse_checkpoint(bad), Error);
  CHECK_THROWS_AS(parse_checkpoint(a.substr(0, a.size() - 3)), Error);
  CHECK_THROWS_AS(parse_checkpoint(a + "x"), Error);
  std::string ver = a;
  ver[8] = 9;
  CHECK_THROWS_AS(parse_checkpoint(ver), Error);
}

TEST_CASE("file round trip") {
  const std::string path = "build_checkpoint_test.bin";
  save_checkpoint(path, sample());
  CHECK(serialize_checkpoint(load_checkpoint(path)) == serialize_checkpoint(sample()));
  std::remove(path.c_str());
}
