#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeguard/backprop.hpp"
#include "spikeguard/network.hpp"
#include "spikeguard/rng.hpp"
#include "spikeguard/tensor.hpp"

namespace spikeguard {

enum class AttackKind { Fgsm, Pgd, Bim, Cw, GaussNoise, UniformNoise };

AttackKind parse_attack_kind(const std::string& name);
std::string to_string(AttackKind kind);

struct AttackConfig {
  AttackKind kind = AttackKind::Fgsm;
  double epsilon = 8.0 / 255.0;
  double step_alpha = 0.01;
  std::size_t steps = 7;
  Approx approx = Approx::Bptt;
  double cw_c = 1.0;
  std::size_t cw_steps = 50;
  double cw_lr = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  std::string label() const;  // e.g. "pgd(eps=0.0314,k=7,bptt)"
};

constexpr double kDefaultNoiseEpsilon = 0.1;

/// (1/T) sum_t dL/dO^0(t) of the batch-mean cross-entropy. Poisson-coded
/// models pass the gradient straight through the encoder.
Tensor input_gradient(const Network& net, const Tensor& x, const std::vector<int>& labels, Approx approx,
                      const Rng* encoder_rng = nullptr);

/// Clamp v into [x0 - eps, x0 + eps] and [0, 1]; the bounds are nudged so
/// that |result - x0| <= eps holds in floating point.
double project(double v, double x0, double epsilon);

Tensor fgsm(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
            const Rng& rng);
Tensor pgd(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
           const Rng& rng);
Tensor bim(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
           const Rng& rng);

/// max(max_{i != j} Z_i - Z_j, 0).
double cw_margin(const std::vector<double>& logits, std::size_t true_class);

struct CwResult {
  Tensor x_adv;
  std::vector<double> l2;         // per sample ||x_adv - x||_2
  std::vector<double> objective;  // batch total of the objective, per iteration (index 0 = start)
};

/// Untargeted tanh-space attack minimizing 1/2 ||x_hat - x||^2 + c max(Z_y - max_{i != y} Z_i, 0)
/// with x_hat = (tanh w + 1) / 2. Plain gradient descent; a sample's step
/// size halves whenever its objective would increase.
CwResult cw(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
            const Rng& rng);

Tensor random_noise(Rng& rng, const Tensor& x, AttackKind kind, double epsilon);

/// Runs cfg against one batch; the batch index selects the random substream.
Tensor run_attack(const Network& net, const Tensor& x, const std::vector<int>& labels, const AttackConfig& cfg,
                  std::uint64_t batch_index);

}  // namespace spikeguard
