#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "gradcheck.hpp"
#include "holab/error.hpp"
#include "holab/nn/checkpoint.hpp"
#include "holab/nn/dense.hpp"
#include "holab/nn/lstm.hpp"
#include "holab/nn/optim.hpp"
#include "test_util.hpp"

using namespace holab;
using namespace holab::nn;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("neural-core") {

TEST_CASE("single-unit LSTM step matches the gate equations") {
  LstmLayerParams p = LstmLayerParams::zeros(1, 1);
  p.W << 0.5, -0.3, 0.8, 0.1;
  p.U << 0.2, 0.4, -0.6, 0.7;
  p.b << 0.1, 1.0, 0.0, -0.2;
  Matrix x(1, 1), h(1, 1), c(1, 1);
  x << 0.9;
  h << -0.4;
  c << 0.3;
  const auto r = lstm_cell_step(x, h, c, p);
  const double i = sigmoid(0.5 * 0.9 + 0.2 * -0.4 + 0.1);
  const double f = sigmoid(-0.3 * 0.9 + 0.4 * -0.4 + 1.0);
  const double g = std::tanh(0.8 * 0.9 - 0.6 * -0.4);
  const double o = sigmoid(0.1 * 0.9 + 0.7 * -0.4 - 0.2);
  const double cn = f * 0.3 + i * g;
  CHECK(r.c(0, 0) == doctest::Approx(cn).epsilon(1e-14));
  CHECK(r.h(0, 0) == doctest::Approx(o * std::tanh(cn)).epsilon(1e-14));
}

TEST_CASE("init uses forget bias 1 and bounded weights") {
  Rng rng(2);
  const auto p = LstmLayerParams::init(5, 4, rng);
  CHECK(p.W.rows() == 16);
  CHECK(p.U.cols() == 4);
  CHECK((p.b.middleRows(4, 4).array() == 1.0).all());
  CHECK(p.b.topRows(4).isZero());
  CHECK(p.b.bottomRows(8).isZero());
  CHECK(p.W.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(5.0));
  CHECK(p.U.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(4.0));
}

TEST_CASE("packed layout puts timestep t of sample b at column t*B+b") {
  Tensor2D a(3, 2), b(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  b << 7, 8, 9, 10, 11, 12;
  const Matrix x = pack_sequences({&a, &b});
  CHECK(x.cols() == 6);
  CHECK(x(0, 0) == 1);
  CHECK(x(0, 1) == 7);
  CHECK(x(1, 2) == 4);
  CHECK(x(1, 5) == 12);
  Tensor2D bad(2, 2);
  CHECK_THROWS_AS(pack_sequences({&a, &bad}), std::invalid_argument);
}

TEST_CASE("batched forward equals per-sequence forward") {
  Rng rng(4);
  const auto stack = LstmStack::init(3, {5, 4}, rng);
  std::vector<Tensor2D> seqs(3, Tensor2D(6, 3));
  for (auto& s : seqs) {
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.uniform(-1, 1);
  }
  const Matrix h = lstm_stack_forward(stack, pack_sequences({&seqs[0], &seqs[1], &seqs[2]}), 6, 3);
  const Matrix last = last_step(h, 6, 3);
  for (int b = 0; b < 3; ++b) {
    const Eigen::VectorXd one = lstm_forward(seqs[b], stack);
    CHECK((one - last.col(b)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("repeated input equals explicitly tiled input") {
  Rng rng(6);
  const auto p = LstmLayerParams::init(3, 4, rng);
  const Matrix x = test::random_matrix(3, 2, rng);
  Matrix tiled(3, 5 * 2);
  for (int t = 0; t < 5; ++t) tiled.middleCols(t * 2, 2) = x;
  const Matrix a = lstm_layer_forward_repeated(p, x, 5);
  const Matrix b = lstm_layer_forward(p, tiled, 5, 2);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gradients match central finite differences") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto r = test::gradcheck_seed(seed);
    CAPTURE(seed);
    CHECK(r.lstm < 1e-5);
    CHECK(r.autoencoder < 1e-5);
    CHECK(r.mlp < 1e-6);
    CHECK(r.lstm_input < 1e-5);
  }
}

TEST_CASE("dense relu layer gradient away from the kink") {
  Rng rng(10);
  DenseParams p = DenseParams::init(4, 3, Activation::Relu, rng);
  Matrix x = test::random_matrix(4, 5, rng);
  DenseCache cache;
  const Matrix y = dense_forward(p, x, &cache);
  CHECK((y.array() >= 0).all());
  CHECK((cache.z.array().abs() > 1e-3).all());
  const Matrix r = test::random_matrix(3, 5, rng);
  DenseParams g = p.zeros_like();
  const Matrix dx = dense_backward(p, cache, r, g);
  auto loss = [&] { return (dense_forward(p, x).array() * r.array()).sum(); };
  double worst = 0;
  for (Matrix* m : {&p.W, &p.b, &x}) {
    const Matrix& an = m == &p.W ? g.W : m == &p.b ? g.b : dx;
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      const double keep = m->data()[i];
      m->data()[i] = keep + test::kFdStep;
      const double up = loss();
      m->data()[i] = keep - test::kFdStep;
      const double down = loss();
      m->data()[i] = keep;
      worst = std::max(worst, test::relative_error(an.data()[i], (up - down) / (2 * test::kFdStep)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("mse and its gradient") {
  Matrix a(1, 4), b(1, 4);
  a << 1, 2, 3, 4;
  b << 1, 0, 3, 8;
  CHECK(mse(a, b) == doctest::Approx(5.0));
  const Matrix g = mse_gradient(a, b);
  CHECK(g(0, 1) == doctest::Approx(1.0));
  CHECK(g(0, 3) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(mse(a, Matrix(1, 3)), std::invalid_argument);
}

TEST_CASE("first Adam step moves each weight by lr against the gradient sign") {
  Matrix w(2, 2), g(2, 2);
  w << 1, 2, 3, 4;
  g << 0.5, -2, 1e-3, -7;
  const Matrix before = w;
  AdamState s;
  Matrix* ps[] = {&w};
  const Matrix* gs[] = {&g};
  adam_step(ps, gs, s);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(before.data()[i] - w.data()[i] == doctest::Approx(1e-3 * (g.data()[i] > 0 ? 1 : -1)).epsilon(1e-4));
  }
  CHECK(s.step == 1);
}

TEST_CASE("Adam minimizes a quadratic") {
  Matrix w(3, 1), target(3, 1);
  w << 5, -3, 0.5;
  target << 1, 2, 3;
  AdamState s;
  s.lr = 0.05;
  Matrix* ps[] = {&w};
  for (int i = 0; i < 2000; ++i) {
    const Matrix g = 2 * (w - target);
    const Matrix* gs[] = {&g};
    adam_step(ps, gs, s);
  }
  CHECK((w - target).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("checkpoint round trip is bit-equal and corrupt files are refused") {
  Rng rng(12);
  Checkpoint c{"toy arch", {{"a", test::random_matrix(3, 2, rng)}, {"b", test::random_matrix(1, 5, rng)}}};
  const auto dir = test::temp_dir("ckpt");
  save_checkpoint(c, dir / "c.ckpt");
  const Checkpoint back = load_checkpoint(dir / "c.ckpt");
  CHECK(back.architecture == "toy arch");
  CHECK(back.get("a") == c.get("a"));
  CHECK(back.get("b") == c.get("b"));
  CHECK_THROWS_AS(back.get("missing"), DataError);

  const std::string bytes = slurp(dir / "c.ckpt");
  CHECK(bytes.substr(0, 5) == "HOLAB");
  std::ofstream(dir / "t.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 1);
  CHECK_THROWS_AS(load_checkpoint(dir / "t.ckpt"), DataError);
  std::ofstream(dir / "x.ckpt", std::ios::binary) << bytes << 'x';
  CHECK_THROWS_AS(load_checkpoint(dir / "x.ckpt"), DataError);
  std::ofstream(dir / "m.ckpt", std::ios::binary) << "HODS" << bytes.substr(4);
  CHECK_THROWS_AS(load_checkpoint(dir / "m.ckpt"), DataError);
}

}
