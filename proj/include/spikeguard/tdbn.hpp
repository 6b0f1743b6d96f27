#pragma once

#include "spikeguard/tensor.hpp"

namespace spikeguard {

/// Threshold-dependent batch norm: out = lambda * alpha * v_th * (I - mean) / sqrt(var + eps) + beta,
/// with statistics per channel over (time, batch, spatial).
struct TdbnParams {
  double alpha = 1.0;
  double v_th = 1.0;
  double eps = 1e-5;
  double momentum = 0.1;
  Tensor lambda;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;

  static TdbnParams init(std::size_t channels, double alpha, double v_th);
  std::size_t channels() const { return lambda.size(); }
  void validate() const;
};

struct TdbnCache {
  bool training = true;
  Tensor normalized;  // (I - mean) / sqrt(var + eps), same shape as input
  Tensor mean;        // per channel
  Tensor var;         // per channel, population
  Tensor inv_std;     // per channel
};

struct TdbnOutput {
  Tensor out;
  TdbnCache cache;
};

struct TdbnGrad {
  Tensor input;
  Tensor lambda;
  Tensor beta;
};

/// `input` has shape [T, B, C, ...]. Training mode normalizes with batch
/// statistics; eval mode with the running ones.
TdbnOutput tdbn_forward(const TdbnParams& params, const Tensor& input, bool training);
TdbnGrad tdbn_backward(const TdbnParams& params, const TdbnCache& cache, const Tensor& d_out);
/// running <- (1 - momentum) running + momentum batch.
void tdbn_update_running(TdbnParams& params, const TdbnCache& cache);

}  // namespace spikeguard
