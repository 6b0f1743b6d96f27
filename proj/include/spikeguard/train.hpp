#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spikeguard/checkpoint.hpp"
#include "spikeguard/config.hpp"
#include "spikeguard/dataset.hpp"
#include "spikeguard/network.hpp"

namespace spikeguard {

/// lr0 (1 + cos(pi e / t_max)) / 2.
double cosine_lr(double lr0, std::size_t epoch, std::size_t t_max);

struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double task_loss = 0.0;   // mean over batches
  double sgr_loss = 0.0;    // mean overlap over batches
  double total_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = -1.0;  // -1 when no test set is given
  double mean_omega = 0.0;      // same as sgr_loss; kept under its own name for the logs
  std::vector<std::vector<double>> layer_mu;     // [layer][t], mean over channels and batches
  std::vector<std::vector<double>> layer_sigma;  // [layer][t]
  std::vector<double> p3;                        // per layer, mean over batches
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochMetrics> metrics;
};

/// Mini-batch SGD with momentum and a cosine schedule on cross-entropy plus
/// eta times the overlap penalty. Throws Error(Numeric) on a non-finite loss
/// or gradient.
TrainResult train(const ModelSpec& spec, const TrainConfig& cfg, const Dataset& train_set, const Dataset* test_set,
                  std::uint64_t seed, const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// Fraction of correct predictions, in [0, 1]. Poisson models draw encoder
/// noise from `seed`.
double clean_accuracy(const Network& net, const Dataset& data, std::size_t batch_size, std::uint64_t seed = 0);
std::vector<int> predict(const Network& net, const Tensor& x, const Rng& encoder_rng);

std::string metrics_csv(const std::vector<EpochMetrics>& metrics);
json metrics_json(const std::vector<EpochMetrics>& metrics);

}  // namespace spikeguard
