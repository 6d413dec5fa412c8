#pragma once

#include <vector>

#include "holab/nn/tensor.hpp"

namespace holab::nn {

/// One LSTM layer. Gate rows are stacked [input; forget; cell; output]:
///   i = sigmoid(W_i x + U_i h + b_i), f and o likewise, g = tanh(...)
///   c = f * c_prev + i * g,  h = o * tanh(c)
struct LstmLayerParams {
  int input_dim = 0;
  int hidden_dim = 0;
  Matrix W;  // 4H x D
  Matrix U;  // 4H x H
  Matrix b;  // 4H x 1

  /// Uniform +-1/sqrt(fan_in) weights, forget bias 1, other biases 0.
  static LstmLayerParams init(int input_dim, int hidden_dim, Rng& rng);
  static LstmLayerParams zeros(int input_dim, int hidden_dim);
};

struct LstmStepResult {
  Matrix gates;   // 4H x B post-activation [i; f; g; o]
  Matrix c;       // H x B
  Matrix tanh_c;  // H x B
  Matrix h;       // H x B
};

/// Single timestep on a batch (one sample per column).
LstmStepResult lstm_cell_step(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                              const LstmLayerParams& params);

struct LstmLayerCache {
  int steps = 0;
  int batch = 0;
  bool repeated_input = false;
  Matrix x;       // D x (T*B), or D x B when the input repeats every step
  Matrix gates;   // 4H x (T*B)
  Matrix c;       // H x (T*B)
  Matrix tanh_c;  // H x (T*B)
  Matrix h;       // H x (T*B)
};

/// Runs the layer over a whole sequence batch; returns all hidden states.
Matrix lstm_layer_forward(const LstmLayerParams& p, const Matrix& x, int steps, int batch,
                          LstmLayerCache* cache = nullptr);

/// Same, with the D x B input `x` fed at every one of `steps` timesteps.
Matrix lstm_layer_forward_repeated(const LstmLayerParams& p, const Matrix& x, int steps,
                                   LstmLayerCache* cache = nullptr);

/// Full backpropagation through time. `dh` is the loss gradient w.r.t. every
/// hidden state (H x T*B). Gradients are accumulated into `grad`. Returns the
/// input gradient, shaped like the cached input.
Matrix lstm_layer_backward(const LstmLayerParams& p, const LstmLayerCache& cache, const Matrix& dh,
                           LstmLayerParams& grad);

/// Stacked LSTM: layer l consumes layer l-1's full hidden sequence.
struct LstmStack {
  std::vector<LstmLayerParams> layers;

  static LstmStack init(int input_dim, const std::vector<int>& hidden, Rng& rng);
  LstmStack zeros_like() const;
  int input_dim() const { return layers.empty() ? 0 : layers.front().input_dim; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().hidden_dim; }
  std::vector<int> hidden_sizes() const;
  std::size_t parameter_count() const;
};

struct LstmStackCache {
  std::vector<LstmLayerCache> layers;
};

/// Returns the top layer's hidden sequence (H_top x T*B).
Matrix lstm_stack_forward(const LstmStack& stack, const Matrix& x, int steps, int batch,
                          LstmStackCache* cache = nullptr, bool repeated_input = false);

/// Returns the gradient w.r.t. the stack input.
Matrix lstm_stack_backward(const LstmStack& stack, const LstmStackCache& cache, const Matrix& dtop,
                           LstmStack& grad);

/// Many-to-one forward of a single sequence (steps x features, row per
/// timestep): the top layer's hidden state after the last step.
Eigen::VectorXd lstm_forward(const Tensor2D& sequence, const LstmStack& stack);

/// Packs sequences into the D x (T*B) batch layout.
Matrix pack_sequences(const std::vector<const Tensor2D*>& sequences);

/// Columns belonging to the last timestep of a T*B sequence matrix.
inline auto last_step(const Matrix& all, int steps, int batch) {
  return all.middleCols(static_cast<Eigen::Index>(steps - 1) * batch, batch);
}

}  // namespace holab::nn
