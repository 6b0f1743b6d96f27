#pragma once

#include <vector>

#include "spikeguard/network.hpp"
#include "spikeguard/tensor.hpp"

namespace spikeguard {

/// Power series below |x| = 2, continued fraction for erfc above. Odd by
/// construction.
double erf(double x);
double erfc(double x);
double normal_pdf(double x);
double normal_cdf(double x);

using ErfFn = double (*)(double);

struct OverlapResult {
  double omega = 0.0;
  double d_mu = 0.0;
  double d_sigma = 0.0;
};

/// Mass of N(mu, sigma^2) inside [-gamma, gamma] and its partial derivatives.
/// `erf_fn` replaces the error function everywhere when given.
OverlapResult overlap(double mu, double sigma, double gamma, ErfFn erf_fn = nullptr);

constexpr double kSigmaMin = 1e-4;

/// Per hidden layer, [T, C] tensors of the mean and floored population std of
/// the shifted potential over batch and spatial positions.
struct MpdStats {
  std::vector<Tensor> mu;
  std::vector<Tensor> sigma;
  std::vector<Tensor> raw_sigma;  // before the floor
  std::vector<std::size_t> count;  // elements per (t, c)
};

/// `u_bar` holds one [T, B, C, spatial...] tensor per layer.
MpdStats mpd_stats(const std::vector<Tensor>& u_bar, double sigma_min = kSigmaMin);
std::vector<Tensor> shifted_potentials(const Trace& trace, double v_th);

struct MpdLoss {
  double loss = 0.0;            // mean overlap over all (layer, channel, timestep)
  std::vector<Tensor> d_u_bar;  // dloss/dU_bar per element, same shapes as the input
};

MpdLoss mpd_sgr_loss(const std::vector<Tensor>& u_bar, const MpdStats& stats, double gamma,
                     ErfFn erf_fn = nullptr);

double total_loss(double task_loss, double sgr_loss, double eta);

constexpr double kDefaultEta = 0.05;

}  // namespace spikeguard
