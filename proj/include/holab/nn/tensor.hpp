#pragma once

#include <Eigen/Core>

#include "holab/rng.hpp"

namespace holab::nn {

/// Working matrix type. Batched activations are laid out one sample per
/// column; sequences put timestep t of sample b in column t * batch + b.
using Matrix = Eigen::MatrixXd;

/// Row-major storage order used on disk and for single sequences.
using Tensor2D = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform(-bound, bound) fill.
inline void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
}

}  // namespace holab::nn
