#pragma once

#include <string>

#include "spikeguard/checkpoint.hpp"
#include "spikeguard/config.hpp"
#include "spikeguard/dataset.hpp"
#include "spikeguard/evaluate.hpp"
#include "spikeguard/mpd.hpp"
#include "spikeguard/train.hpp"

namespace spikeguard {

Dataset load_train_set(const ExperimentConfig& cfg);
Dataset load_test_set(const ExperimentConfig& cfg);

/// Trains and writes checkpoint.bin, metrics.csv, metrics.json and
/// config.json into cfg.out_dir (or the checkpoint to `checkpoint_path` when
/// given). A non-finite loss writes nan_dump.json before rethrowing.
json run_train(const ExperimentConfig& cfg, const std::string& checkpoint_path = "");

/// Clean accuracy plus every configured attack and sweep; writes eval.json
/// and eval.csv.
EvalReport run_evaluate(const ExperimentConfig& cfg, const std::string& checkpoint_path);

/// The single `attack` entry of the config; writes attack.json and attack.csv.
EvalReport run_attack_campaign(const ExperimentConfig& cfg, const std::string& checkpoint_path);

/// theorem1 | theorem2 | gradients | obfuscation; writes verify_<what>.json.
json run_verify(const std::string& what, const ExperimentConfig& cfg, const std::string& checkpoint_path,
                ErfFn erf_fn = nullptr);

/// Trains the substitute (seed + offset) when `substitute_path` is empty.
json run_checklist(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                   const std::string& substitute_path = "");

/// Trains one model per eta and records clean and FGSM accuracy, final mean
/// overlap and the P3 diagnostic; writes sweep_eta.csv and sweep_eta.json.
json run_sweep_eta(const ExperimentConfig& cfg);

}  // namespace spikeguard
