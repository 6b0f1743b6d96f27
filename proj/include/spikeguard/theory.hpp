#pragma once

#include <cstdint>
#include <vector>

#include "spikeguard/network.hpp"
#include "spikeguard/neuron.hpp"
#include "spikeguard/rng.hpp"
#include "spikeguard/tensor.hpp"

namespace spikeguard {

/// D(tau, t) = sum_{i=1..t} tau^(t-i).
double cumulative_decay(double tau, std::size_t t);

/// A single soft-reset LIF population driven by i.i.d. normalized currents
/// N(beta, (lambda alpha bn_v_th)^2). `bn_v_th` is the threshold used by the
/// normalization scale and `v_th` the firing threshold; a network ties them,
/// the lab separates them so the firing-free regime can be studied at a
/// fixed drive scale.
struct Theorem1Params {
  double tau = 1.0;
  std::size_t timesteps = 8;
  double beta = 0.0;
  double lambda = 1.0;
  double alpha = 1.0;
  double bn_v_th = 1.0;
  double v_th = 1.0;
  ResetMode reset = ResetMode::Soft;
  std::vector<double> rates;  // f(t), t = 1..T; empty means no spikes

  void validate() const;
  double drive_std() const { return std::abs(lambda * alpha * bn_v_th); }
};

struct Theorem1Moments {
  std::vector<double> mean;  // per t = 1..T, of the membrane potential
  std::vector<double> var;
  std::vector<double> reset_shift;  // S(t)
};

/// mean(t) = beta D(tau, t) - S(t), var(t) = (lambda alpha V_th)^2 D(tau^2, t),
/// S(t) = sum_{i=1..t-1} tau^(t-i) f(i) v_th.
Theorem1Moments theorem1_closed_form(const Theorem1Params& params);

struct Theorem1Sample {
  std::vector<double> mean;     // empirical mean of U(t)
  std::vector<double> var;      // unbiased sample variance of U(t)
  std::vector<double> rates;    // fraction of neurons firing at t
  std::size_t trials = 0;
};

Theorem1Sample theorem1_monte_carlo(const Rng& rng, const Theorem1Params& params, std::size_t n_trials);

/// Chi-square quantile via the Wilson-Hilferty transform, for a standard
/// normal quantile z.
double chi2_quantile_wh(double dof, double z);

struct GaussianFit {
  double mu = 0.0;
  double sigma = 0.0;
  double max_cdf_dev = 0.0;  // Kolmogorov-Smirnov statistic against N(mu, sigma^2)
  bool degenerate = false;   // sigma == 0; max_cdf_dev is then 1
};

GaussianFit gaussian_fit(std::vector<double> samples);

/// Set of (layer, neuron, timestep) with U_bar >= 0, stored as one flag per
/// triple in [layer][t][neuron] order, plus the smallest |U_bar|.
struct FiringPattern {
  std::vector<std::uint8_t> fired;
  double min_margin = 0.0;

  std::size_t count() const;
  bool operator==(const FiringPattern& other) const { return fired == other.fired; }
};

/// x is one sample. Evaluated in eval mode.
FiringPattern firing_pattern(const Network& net, const Tensor& x);
/// Time-averaged readout of one sample, as a flat vector.
std::vector<double> network_output(const Network& net, const Tensor& x);

constexpr double kBoundaryMargin = 1e-9;

struct CellAffine {
  FiringPattern pattern;
  Tensor w;  // [m, n]
  std::vector<double> b;
  double residual = 0.0;      // max |f(x') - (W x' + b)| over in-cell checks
  std::size_t checks = 0;     // in-cell points used for the residual
  double probe_scale = 0.0;   // scale that stayed in-cell
  bool boundary = false;      // x too close to a cell wall, or probes kept leaving
};

CellAffine extract_affine(const Network& net, const Tensor& x, double probe_scale, const Rng& rng,
                          std::size_t residual_checks = 100);

/// max over delta in {-1, 1}^n of ||W delta||_2. Requires n <= 20.
double opnorm_inf_to_2(const Tensor& w);

struct OpNormBounds {
  double lower = 0.0;  // best sampled vertex
  double upper = 0.0;  // sqrt(n) ||W||_F
  bool exact = false;
};

/// Exact when n <= 20, otherwise vertex sampling plus the analytic upper bound.
OpNormBounds opnorm_inf_to_2_bounds(const Tensor& w, const Rng& rng, std::size_t samples = 4096);

struct SensitivityReport {
  double epsilon = 0.0;
  std::size_t directions = 0;
  std::size_t cells = 0;
  std::size_t boundary_cells = 0;
  double max_opnorm = 0.0;
  double bound = 0.0;  // eps^2 max ||W_P||^2
  double max_sensitivity = 0.0;
  double max_residual = 0.0;
  std::size_t violations = 0;
  std::size_t cell_changes = 0;  // directions whose endpoint left the cell of x
  std::vector<double> margin_edges;
  std::vector<std::size_t> margin_hist;  // counts of (bound - sensitivity) per bin
};

constexpr double kSensitivityTolerance = 1e-12;

SensitivityReport sensitivity_bound_check(const Network& net, const Tensor& x, double epsilon, std::size_t n_dirs,
                                          const Rng& rng);

}  // namespace spikeguard
