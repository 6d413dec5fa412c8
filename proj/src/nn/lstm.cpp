#include "holab/nn/lstm.hpp"

#include <cmath>
#include <stdexcept>

namespace holab::nn {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Applies gate nonlinearities in place: sigmoid on i, f, o and tanh on g.
void activate_gates(Eigen::Ref<Matrix> pre, Eigen::Index hidden) {
  pre.topRows(2 * hidden) = pre.topRows(2 * hidden).unaryExpr(&sigmoid);
  pre.middleRows(2 * hidden, hidden) = pre.middleRows(2 * hidden, hidden).array().tanh();
  pre.bottomRows(hidden) = pre.bottomRows(hidden).unaryExpr(&sigmoid);
}

// `gates` holds pre-activations on entry and activations on exit.
void step_in_place(Eigen::Ref<Matrix> gates, Eigen::Ref<Matrix> c, Eigen::Ref<Matrix> tanh_c,
                   Eigen::Ref<Matrix> h, const Matrix& c_prev, Eigen::Index hidden) {
  activate_gates(gates, hidden);
  const auto i = gates.topRows(hidden).array();
  const auto f = gates.middleRows(hidden, hidden).array();
  const auto g = gates.middleRows(2 * hidden, hidden).array();
  const auto o = gates.bottomRows(hidden).array();
  c = (f * c_prev.array() + i * g).matrix();
  tanh_c = c.array().tanh().matrix();
  h = (o * tanh_c.array()).matrix();
}

Matrix run_layer(const LstmLayerParams& p, const Matrix& x, int steps, int batch, bool repeated,
                 LstmLayerCache* cache) {
  check(steps >= 1, "lstm: sequence needs at least one timestep");
  check(batch >= 1, "lstm: empty batch");
  check(x.rows() == p.input_dim, "lstm: input dimension mismatch");
  check(x.cols() == (repeated ? batch : static_cast<Eigen::Index>(steps) * batch), "lstm: input column count mismatch");
  const Eigen::Index H = p.hidden_dim;
  const Eigen::Index TB = static_cast<Eigen::Index>(steps) * batch;

  Matrix gates(4 * H, TB);
  if (repeated) {
    const Matrix proj = (p.W * x).colwise() + p.b.col(0);
    for (int t = 0; t < steps; ++t) gates.middleCols(static_cast<Eigen::Index>(t) * batch, batch) = proj;
  } else {
    gates.noalias() = p.W * x;
    gates.colwise() += p.b.col(0);
  }

  Matrix c(H, TB), tanh_c(H, TB), h(H, TB);
  Matrix h_prev = Matrix::Zero(H, batch);
  Matrix c_prev = Matrix::Zero(H, batch);
  for (int t = 0; t < steps; ++t) {
    const Eigen::Index col = static_cast<Eigen::Index>(t) * batch;
    auto g_t = gates.middleCols(col, batch);
    g_t.noalias() += p.U * h_prev;
    step_in_place(g_t, c.middleCols(col, batch), tanh_c.middleCols(col, batch), h.middleCols(col, batch), c_prev, H);
    h_prev = h.middleCols(col, batch);
    c_prev = c.middleCols(col, batch);
  }

  if (cache != nullptr) {
    cache->steps = steps;
    cache->batch = batch;
    cache->repeated_input = repeated;
    cache->x = x;
    cache->gates = std::move(gates);
    cache->c = std::move(c);
    cache->tanh_c = std::move(tanh_c);
    cache->h = h;
  }
  return h;
}

}  // namespace

LstmLayerParams LstmLayerParams::init(int input_dim, int hidden_dim, Rng& rng) {
  LstmLayerParams p = zeros(input_dim, hidden_dim);
  fill_uniform(p.W, 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
  fill_uniform(p.U, 1.0 / std::sqrt(static_cast<double>(hidden_dim)), rng);
  p.b.middleRows(hidden_dim, hidden_dim).setOnes();
  return p;
}

LstmLayerParams LstmLayerParams::zeros(int input_dim, int hidden_dim) {
  check(input_dim >= 1 && hidden_dim >= 1, "lstm: dimensions must be positive");
  LstmLayerParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.W = Matrix::Zero(4 * hidden_dim, input_dim);
  p.U = Matrix::Zero(4 * hidden_dim, hidden_dim);
  p.b = Matrix::Zero(4 * hidden_dim, 1);
  return p;
}

LstmStepResult lstm_cell_step(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                              const LstmLayerParams& p) {
  check(x.rows() == p.input_dim, "lstm: input dimension mismatch");
  check(h_prev.rows() == p.hidden_dim && c_prev.rows() == p.hidden_dim, "lstm: state dimension mismatch");
  check(h_prev.cols() == x.cols() && c_prev.cols() == x.cols(), "lstm: batch size mismatch");
  LstmStepResult r;
  r.gates = p.W * x + p.U * h_prev;
  r.gates.colwise() += p.b.col(0);
  r.c.resize(p.hidden_dim, x.cols());
  r.tanh_c.resize(p.hidden_dim, x.cols());
  r.h.resize(p.hidden_dim, x.cols());
  step_in_place(r.gates, r.c, r.tanh_c, r.h, c_prev, p.hidden_dim);
  return r;
}

Matrix lstm_layer_forward(const LstmLayerParams& p, const Matrix& x, int steps, int batch, LstmLayerCache* cache) {
  return run_layer(p, x, steps, batch, false, cache);
}

Matrix lstm_layer_forward_repeated(const LstmLayerParams& p, const Matrix& x, int steps, LstmLayerCache* cache) {
  return run_layer(p, x, steps, static_cast<int>(x.cols()), true, cache);
}

Matrix lstm_layer_backward(const LstmLayerParams& p, const LstmLayerCache& cache, const Matrix& dh,
                           LstmLayerParams& grad) {
  check(cache.steps >= 1 && cache.gates.size() > 0, "lstm: backward called without a forward cache");
  const Eigen::Index H = p.hidden_dim;
  const int T = cache.steps;
  const int B = cache.batch;
  const Eigen::Index TB = static_cast<Eigen::Index>(T) * B;
  check(dh.rows() == H && dh.cols() == TB, "lstm: upstream gradient shape mismatch");

  Matrix dgates(4 * H, TB);
  Matrix dh_next = Matrix::Zero(H, B);
  Matrix dc_next = Matrix::Zero(H, B);
  for (int t = T - 1; t >= 0; --t) {
    const Eigen::Index col = static_cast<Eigen::Index>(t) * B;
    const auto gates = cache.gates.middleCols(col, B);
    const auto i = gates.topRows(H).array();
    const auto f = gates.middleRows(H, H).array();
    const auto g = gates.middleRows(2 * H, H).array();
    const auto o = gates.bottomRows(H).array();
    const auto tc = cache.tanh_c.middleCols(col, B).array();

    const Eigen::ArrayXXd dh_t = dh.middleCols(col, B).array() + dh_next.array();
    const Eigen::ArrayXXd dc = dc_next.array() + dh_t * o * (1.0 - tc * tc);

    auto dg_t = dgates.middleCols(col, B);
    dg_t.topRows(H) = (dc * g * i * (1.0 - i)).matrix();
    if (t > 0) {
      dg_t.middleRows(H, H) = (dc * cache.c.middleCols(col - B, B).array() * f * (1.0 - f)).matrix();
    } else {
      dg_t.middleRows(H, H).setZero();
    }
    dg_t.middleRows(2 * H, H) = (dc * i * (1.0 - g * g)).matrix();
    dg_t.bottomRows(H) = (dh_t * tc * o * (1.0 - o)).matrix();

    dc_next = (dc * f).matrix();
    dh_next.noalias() = p.U.transpose() * dg_t;
  }

  grad.b.col(0) += dgates.rowwise().sum();
  if (T > 1) {
    grad.U.noalias() += dgates.rightCols(TB - B) * cache.h.leftCols(TB - B).transpose();
  }
  if (cache.repeated_input) {
    Matrix summed = Matrix::Zero(4 * H, B);
    for (int t = 0; t < T; ++t) summed += dgates.middleCols(static_cast<Eigen::Index>(t) * B, B);
    grad.W.noalias() += summed * cache.x.transpose();
    return p.W.transpose() * summed;
  }
  grad.W.noalias() += dgates * cache.x.transpose();
  return p.W.transpose() * dgates;
}

LstmStack LstmStack::init(int input_dim, const std::vector<int>& hidden, Rng& rng) {
  check(!hidden.empty(), "lstm: stack needs at least one layer");
  LstmStack s;
  int in = input_dim;
  for (int h : hidden) {
    s.layers.push_back(LstmLayerParams::init(in, h, rng));
    in = h;
  }
  return s;
}

LstmStack LstmStack::zeros_like() const {
  LstmStack s;
  for (const auto& l : layers) s.layers.push_back(LstmLayerParams::zeros(l.input_dim, l.hidden_dim));
  return s;
}

std::vector<int> LstmStack::hidden_sizes() const {
  std::vector<int> out;
  for (const auto& l : layers) out.push_back(l.hidden_dim);
  return out;
}

std::size_t LstmStack::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.W.size() + l.U.size() + l.b.size();
  return n;
}

Matrix lstm_stack_forward(const LstmStack& stack, const Matrix& x, int steps, int batch, LstmStackCache* cache,
                          bool repeated_input) {
  check(!stack.layers.empty(), "lstm: empty stack");
  if (cache != nullptr) cache->layers.resize(stack.layers.size());
  Matrix h;
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    LstmLayerCache* lc = cache != nullptr ? &cache->layers[l] : nullptr;
    if (l == 0) {
      h = run_layer(stack.layers[0], x, steps, batch, repeated_input, lc);
    } else {
      h = run_layer(stack.layers[l], h, steps, batch, false, lc);
    }
  }
  return h;
}

Matrix lstm_stack_backward(const LstmStack& stack, const LstmStackCache& cache, const Matrix& dtop, LstmStack& grad) {
  check(cache.layers.size() == stack.layers.size(), "lstm: backward called without a forward cache");
  Matrix d = dtop;
  for (std::size_t l = stack.layers.size(); l-- > 0;) {
    d = lstm_layer_backward(stack.layers[l], cache.layers[l], d, grad.layers[l]);
  }
  return d;
}

Matrix pack_sequences(const std::vector<const Tensor2D*>& sequences) {
  check(!sequences.empty(), "lstm: empty batch");
  const Eigen::Index T = sequences.front()->rows();
  const Eigen::Index D = sequences.front()->cols();
  const Eigen::Index B = static_cast<Eigen::Index>(sequences.size());
  Matrix x(D, T * B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const Tensor2D& s = *sequences[b];
    check(s.rows() == T && s.cols() == D, "lstm: sequences in a batch must share a shape");
    for (Eigen::Index t = 0; t < T; ++t) x.col(t * B + b) = s.row(t).transpose();
  }
  return x;
}

Eigen::VectorXd lstm_forward(const Tensor2D& sequence, const LstmStack& stack) {
  const int steps = static_cast<int>(sequence.rows());
  const Matrix h = lstm_stack_forward(stack, pack_sequences({&sequence}), steps, 1);
  return h.col(h.cols() - 1);
}

}  // namespace holab::nn
