#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spikeguard/attacks.hpp"
#include "spikeguard/network.hpp"

namespace spikeguard {

using json = nlohmann::json;

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;
  double eta = 0.05;
  bool adversarial = false;
  AttackConfig at{AttackKind::Pgd, 2.0 / 255.0, 1.0 / 255.0, 2};

  void validate() const;
};

struct SynthConfig {
  std::size_t n_train = 400;
  std::size_t n_test = 200;
  std::size_t classes = 2;
  std::size_t dim = 2;
  double sep = 10.0;
};

struct DataConfig {
  std::string source = "idx";  // idx | synth
  std::string train_images = "data/mnist/train-images-idx3-ubyte";
  std::string train_labels = "data/mnist/train-labels-idx1-ubyte";
  std::string test_images = "data/mnist/t10k-images-idx3-ubyte";
  std::string test_labels = "data/mnist/t10k-labels-idx1-ubyte";
  std::size_t train_limit = 0;  // 0 = all
  std::size_t test_limit = 0;
  SynthConfig synth;

  void validate() const;
};

struct EvalConfig {
  std::size_t batch_size = 100;
  std::vector<AttackConfig> attacks;
  AttackConfig sweep_attack{AttackKind::Pgd};
  std::vector<double> eps_sweep;
  std::vector<std::size_t> k_sweep;
};

struct ChecklistConfig {
  double epsilon = 8.0 / 255.0;
  std::size_t steps = 7;
  double step_alpha = 0.01;
  Approx approx = Approx::Bptt;
  std::vector<double> eps_grid{2.0 / 255.0, 4.0 / 255.0, 8.0 / 255.0, 16.0 / 255.0, 32.0 / 255.0};
  double tolerance_points = 1.0;
  double unbounded_epsilon = 1.0;
  std::size_t unbounded_steps = 20;
  double unbounded_alpha = 0.1;
  std::size_t random_subset = 200;
  std::size_t random_samples = 16;
  double random_max_fraction = 0.01;
  std::size_t batch_size = 100;
  std::uint64_t substitute_seed_offset = 1000;

  void validate() const;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "runs/default";
  ModelSpec model;
  TrainConfig train;
  DataConfig data;
  AttackConfig attack;
  EvalConfig eval;
  ChecklistConfig checklist;
  std::vector<double> sweep_etas{0.0, 0.01, 0.05, 0.1};

  void validate() const;
};

ExperimentConfig default_config();

/// Strict parsing: unknown keys and wrong types are errors.
ExperimentConfig config_from_json(const json& j);
/// The same key and type checks without the cross-field validation, for
/// checking one override at a time.
ExperimentConfig parse_config(const json& j);
json config_to_json(const ExperimentConfig& c);

json model_spec_to_json(const ModelSpec& m);
ModelSpec model_spec_from_json(const json& j);
json attack_to_json(const AttackConfig& a);
AttackConfig attack_from_json(const json& j);

/// Sets a dotted key ("train.eta") to a JSON-encoded value, or to the raw
/// string when the value is not valid JSON.
void set_override(json& j, const std::string& dotted_key, const std::string& value);

ExperimentConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace spikeguard
