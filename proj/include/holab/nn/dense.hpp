#pragma once

#include "holab/nn/tensor.hpp"

namespace holab::nn {

enum class Activation { Identity, Relu };

struct DenseParams {
  Matrix W;  // out x in
  Matrix b;  // out x 1
  Activation activation = Activation::Identity;

  static DenseParams init(int in, int out, Activation act, Rng& rng);
  DenseParams zeros_like() const;
  int in_dim() const { return static_cast<int>(W.cols()); }
  int out_dim() const { return static_cast<int>(W.rows()); }
};

struct DenseCache {
  Matrix x;  // in x N
  Matrix z;  // pre-activation, out x N
};

Matrix dense_forward(const DenseParams& p, const Matrix& x, DenseCache* cache = nullptr);

/// Accumulates parameter gradients into `grad`; returns dL/dx.
Matrix dense_backward(const DenseParams& p, const DenseCache& cache, const Matrix& dy, DenseParams& grad);

}  // namespace holab::nn
