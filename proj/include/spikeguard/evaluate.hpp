#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeguard/attacks.hpp"
#include "spikeguard/config.hpp"
#include "spikeguard/dataset.hpp"
#include "spikeguard/network.hpp"

namespace spikeguard {

/// Accuracy on examples crafted against `source` and scored on `target`
/// (pass the same model twice for a white-box attack).
struct AttackOutcome {
  double accuracy = 0.0;
  double mean_l2 = 0.0;      // mean ||x_adv - x||_2
  double max_linf = 0.0;     // max ||x_adv - x||_inf
  std::vector<int> correct;  // per sample 0/1
};

AttackOutcome attacked_accuracy(const Network& target, const Network& source, const Dataset& data,
                                const AttackConfig& cfg, std::size_t batch_size);

struct EvalEntry {
  std::string label;
  AttackConfig attack;
  std::string grid;  // "", "eps_sweep" or "k_sweep"
  double accuracy = 0.0;
  double mean_l2 = 0.0;
  double max_linf = 0.0;
};

struct EvalReport {
  std::size_t samples = 0;
  double clean_accuracy = 0.0;
  std::vector<EvalEntry> entries;

  bool operator==(const EvalReport& other) const;
};

EvalReport evaluate(const Network& net, const Dataset& data, const EvalConfig& cfg, std::uint64_t seed);

json eval_report_to_json(const EvalReport& r);
EvalReport eval_report_from_json(const json& j);
std::string eval_report_csv(const EvalReport& r);

struct ChecklistVerdict {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  json metrics;
};

/// The five gradient-obfuscation screens:
///   1 iterative PGD is at least as strong as single-step FGSM
///   2 transfer from an independently trained substitute is weaker than white-box
///   3 accuracy does not rise as epsilon grows (within a tolerance)
///   4 an unbounded attack drives accuracy to chance
///   5 random sampling in the ball rarely finds examples the gradient attack missed
std::vector<ChecklistVerdict> obfuscation_checklist(const Network& target, const Network& substitute,
                                                    const Dataset& data, const ChecklistConfig& cfg,
                                                    std::uint64_t seed);
json checklist_to_json(const std::vector<ChecklistVerdict>& verdicts);

}  // namespace spikeguard
