#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "spikeguard/spikeguard.h"

namespace {

struct Cfg {
  spkgrd_config* p = nullptr;
  Cfg() { REQUIRE(spkgrd_config_default(&p) == SPKGRD_OK); }
  ~Cfg() { spkgrd_config_free(p); }
};

nlohmann::json take(char* s) {
  const std::string body(s);
  spkgrd_string_free(s);
  return nlohmann::json::parse(body);
}

}  // namespace

TEST_CASE("errors carry codes and messages") {
  spkgrd_config* c = nullptr;
  CHECK(spkgrd_config_load("/nonexistent/config.json", &c) == SPKGRD_IO);
  CHECK(std::string(spkgrd_last_error()).find("cannot open") != std::string::npos);
  CHECK(c == nullptr);
  Cfg cfg;
  CHECK(spkgrd_config_set(cfg.p, "train.bogus", "1") == SPKGRD_INVALID_ARGUMENT);
  CHECK(std::string(spkgrd_last_error()).find("bogus") != std::string::npos);
  CHECK(spkgrd_config_set(cfg.p, "train.eta", "0.1") == SPKGRD_OK);
  CHECK(std::string(spkgrd_last_error()).empty());
  CHECK(spkgrd_config_set(nullptr, "a", "b") == SPKGRD_INVALID_ARGUMENT);
  spkgrd_model* m = nullptr;
  CHECK(spkgrd_model_load("/nonexistent/ck.bin", &m) == SPKGRD_IO);
  char* out = nullptr;
  CHECK(spkgrd_verify(cfg.p, "theorem9", nullptr, 0.0, &out) == SPKGRD_INVALID_ARGUMENT);
  CHECK(out == nullptr);
}

TEST_CASE("resolved configuration") {
  Cfg cfg;
  REQUIRE(spkgrd_config_set(cfg.p, "model.tdbn.alpha", "1.5") == SPKGRD_OK);
  char* out = nullptr;
  REQUIRE(spkgrd_config_json(cfg.p, &out) == SPKGRD_OK);
  const auto j = take(out);
  CHECK(j["model"]["tdbn"]["alpha"] == 1.5);
  CHECK(j["train"]["lr"] == 0.1);
}

TEST_CASE("train, load and predict through the C interface") {
  const std::string dir = (std::filesystem::temp_directory_path() / "spikeguard_capi_test").string();
  std::filesystem::remove_all(dir);
  Cfg cfg;
  for (auto [k, v] : std::vector<std::pair<const char*, std::string>>{{"data.source", "\"synth\""},
                                                                      {"model.input_shape", "[2]"},
                                                                      {"model.classes", "2"},
                                                                      {"model.layers", R"([{"type":"dense","width":8,"tdbn":true}])"},
                                                                      {"train.epochs", "2"},
                                                                      {"out_dir", nlohmann::json(dir).dump()}})
    REQUIRE(spkgrd_config_set(cfg.p, k, v.c_str()) == SPKGRD_OK);
  char* out = nullptr;
  REQUIRE(spkgrd_train(cfg.p, nullptr, &out) == SPKGRD_OK);
  const auto j = take(out);
  CHECK(j["epochs"] == 2);
  CHECK(std::filesystem::exists(dir + "/checkpoint.bin"));
  CHECK(std::filesystem::exists(dir + "/metrics.csv"));
  CHECK(std::filesystem::exists(dir + "/config.json"));

  spkgrd_model* m = nullptr;
  REQUIRE(spkgrd_model_load((dir + "/checkpoint.bin").c_str(), &m) == SPKGRD_OK);
  CHECK(spkgrd_model_input_size(m) == 2);
  CHECK(spkgrd_model_classes(m) == 2);
  const double x[4] = {0.9, 0.1, 0.1, 0.9};
  int labels[2] = {-1, -1};
  CHECK(spkgrd_model_predict(m, x, 2, 1, labels) == SPKGRD_OK);
  CHECK((labels[0] >= 0 && labels[0] < 2));
  CHECK(spkgrd_model_predict(m, x, 0, 1, labels) == SPKGRD_INVALID_ARGUMENT);
  spkgrd_model_free(m);

  REQUIRE(spkgrd_evaluate(cfg.p, nullptr, &out) == SPKGRD_OK);
  CHECK(take(out)["samples"] == 200);
  std::filesystem::remove_all(dir);
}

TEST_CASE("gradient verification and fault injection") {
  const std::string dir = (std::filesystem::temp_directory_path() / "spikeguard_capi_verify").string();
  Cfg cfg;
  REQUIRE(spkgrd_config_set(cfg.p, "out_dir", nlohmann::json(dir).dump().c_str()) == SPKGRD_OK);
  char* out = nullptr;
  REQUIRE(spkgrd_verify(cfg.p, "gradients", nullptr, 0.0, &out) == SPKGRD_OK);
  CHECK(take(out)["pass"] == true);
  REQUIRE(spkgrd_verify(cfg.p, "gradients", nullptr, 1e-3, &out) == SPKGRD_OK);
  CHECK(take(out)["pass"] == false);
  std::filesystem::remove_all(dir);
}
