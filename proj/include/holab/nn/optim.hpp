#pragma once

#include <span>
#include <vector>

#include "holab/nn/tensor.hpp"

namespace holab::nn {

/// Mean of squared differences. Throws on length mismatch.
double mse(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& target);

/// d mse / d pred.
Matrix mse_gradient(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& target);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

/// Bias-corrected Adam update of every parameter in place. Moment buffers
/// are created on the first call.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamState& state);

}  // namespace holab::nn
