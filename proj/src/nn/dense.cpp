#include "holab/nn/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace holab::nn {

DenseParams DenseParams::init(int in, int out, Activation act, Rng& rng) {
  if (in < 1 || out < 1) throw std::invalid_argument("dense: dimensions must be positive");
  DenseParams p;
  p.W = Matrix::Zero(out, in);
  p.b = Matrix::Zero(out, 1);
  p.activation = act;
  fill_uniform(p.W, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  return p;
}

DenseParams DenseParams::zeros_like() const {
  return {Matrix::Zero(W.rows(), W.cols()), Matrix::Zero(b.rows(), 1), activation};
}

Matrix dense_forward(const DenseParams& p, const Matrix& x, DenseCache* cache) {
  if (x.rows() != p.W.cols()) throw std::invalid_argument("dense: input dimension mismatch");
  Matrix z = p.W * x;
  z.colwise() += p.b.col(0);
  Matrix y = p.activation == Activation::Relu ? Matrix(z.cwiseMax(0.0)) : z;
  if (cache != nullptr) {
    cache->x = x;
    cache->z = std::move(z);
  }
  return y;
}

Matrix dense_backward(const DenseParams& p, const DenseCache& cache, const Matrix& dy, DenseParams& grad) {
  if (cache.z.size() == 0) throw std::invalid_argument("dense: backward called without a forward cache");
  if (dy.rows() != cache.z.rows() || dy.cols() != cache.z.cols()) {
    throw std::invalid_argument("dense: upstream gradient shape mismatch");
  }
  Matrix dz = dy;
  if (p.activation == Activation::Relu) dz = (cache.z.array() > 0.0).select(dy, 0.0);
  grad.W.noalias() += dz * cache.x.transpose();
  grad.b.col(0) += dz.rowwise().sum();
  return p.W.transpose() * dz;
}

}  // namespace holab::nn
