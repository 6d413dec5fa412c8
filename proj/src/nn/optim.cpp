#include "holab/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace holab::nn {

double mse(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& target) {
  if (pred.size() != target.size()) throw std::invalid_argument("mse: length mismatch");
  if (pred.size() == 0) return 0.0;
  return (pred.reshaped() - target.reshaped()).squaredNorm() / static_cast<double>(pred.size());
}

Matrix mse_gradient(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("mse: shape mismatch");
  }
  return (2.0 / static_cast<double>(pred.size())) * (pred - target);
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamState& s) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam: parameter/gradient count mismatch");
  if (s.m.empty()) {
    for (const Matrix* p : params) {
      s.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      s.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (s.m.size() != params.size()) throw std::invalid_argument("adam: state does not match parameters");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k]->rows() != params[k]->rows() || grads[k]->cols() != params[k]->cols()) {
      throw std::invalid_argument("adam: gradient shape mismatch");
    }
  }

  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto m = s.m[k].array();
    auto v = s.v[k].array();
    const auto g = grads[k]->array();
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g * g;
    params[k]->array() -= s.lr * (m / c1) / ((v / c2).sqrt() + s.epsilon);
  }
}

}  // namespace holab::nn
