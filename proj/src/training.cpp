#include "holab/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "holab/error.hpp"
#include "holab/nn/optim.hpp"

namespace holab {

namespace {

constexpr std::size_t kEvalChunk = 64;

std::vector<const nn::Tensor2D*> gather(const Dataset& d, std::span<const std::size_t> idx) {
  std::vector<const nn::Tensor2D*> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(&d.rows[i].features);
  return out;
}

template <class Fn>
double chunked_mean(std::span<const std::size_t> idx, Fn&& chunk_loss) {
  double sum = 0.0;
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const auto part = idx.subspan(start, std::min(kEvalChunk, idx.size() - start));
    sum += chunk_loss(part) * static_cast<double>(part.size());
  }
  return sum / static_cast<double>(idx.size());
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// Mini-batch Adam over the training indices; keeps the parameters of the
// epoch with the lowest validation loss.
template <class Model, class BatchLoss, class EvalLoss>
LossCurve fit(Model& model, std::size_t n, const TrainConfig& cfg, BatchLoss&& batch_loss, EvalLoss&& eval_loss) {
  cfg.validate();
  auto [val_idx, train_idx] = train_val_split(n, cfg.validation_fraction, cfg.seed);
  const std::vector<std::size_t>& monitor = val_idx.empty() ? train_idx : val_idx;

  nn::AdamState adam;
  adam.lr = cfg.lr;
  Rng rng(cfg.seed, 0x5eed);
  LossCurve curve;
  Model best = model;
  double best_val = std::numeric_limits<double>::infinity();
  const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), train_idx.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(train_idx, rng);
    double sum = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += bs) {
      const std::span<const std::size_t> batch(train_idx.data() + start, std::min(bs, train_idx.size() - start));
      Model grad = model.zeros_like();
      sum += batch_loss(model, batch, grad) * static_cast<double>(batch.size());
      const std::vector<nn::Matrix*> params = model.parameters();
      const std::vector<nn::Matrix*> g = grad.parameters();
      const std::vector<const nn::Matrix*> grads(g.begin(), g.end());
      nn::adam_step(params, grads, adam);
    }
    curve.train_mse.push_back(sum / static_cast<double>(train_idx.size()));
    const double val = eval_loss(model, std::span<const std::size_t>(monitor));
    if (!std::isfinite(val)) throw DataError("training diverged (non-finite validation loss)");
    curve.val_mse.push_back(val);
    if (val < best_val) {
      best_val = val;
      best = model;
      curve.best_epoch = epoch;
    }
  }
  model = std::move(best);
  return curve;
}

void require_rows(const Dataset& d) {
  if (d.empty()) throw DataError("dataset is empty");
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (!(lr > 0)) throw UsageError("lr must be > 0");
  if (!(validation_fraction >= 0 && validation_fraction < 1)) throw UsageError("validation_fraction must be in [0, 1)");
}

double LossCurve::mean_val() const {
  if (val_mse.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(val_mse.begin(), val_mse.end(), 0.0) / static_cast<double>(val_mse.size());
}

double LossCurve::final_val() const {
  return val_mse.empty() ? std::numeric_limits<double>::quiet_NaN() : val_mse.back();
}

double LossCurve::best_val() const {
  return val_mse.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::min_element(val_mse.begin(), val_mse.end());
}

void write_loss_curve(const LossCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(10);
  out << "epoch,train_mse,val_mse\n";
  for (std::size_t e = 0; e < curve.train_mse.size(); ++e) {
    out << e + 1 << ',' << curve.train_mse[e] << ',' << curve.val_mse[e] << '\n';
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_val_split(std::size_t n, double fraction,
                                                                               std::uint64_t seed) {
  if (n == 0) throw DataError("dataset is empty");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed, 0x5911);
  shuffle(idx, rng);
  const auto n_val = std::min(n - 1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  std::vector<std::size_t> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {std::move(val), std::move(train)};
}

std::vector<const SequenceMatrix*> sequence_pointers(const Dataset& dataset) {
  std::vector<const SequenceMatrix*> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.rows) out.push_back(&r.features);
  return out;
}

std::vector<double> labels_of(const Dataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.rows) out.push_back(r.label);
  return out;
}

Trained<LstmRegressor> train_lstm_regressor(const Dataset& dataset, const std::vector<int>& hidden,
                                            const TrainConfig& cfg, const ModelContext& context) {
  require_rows(dataset);
  const int steps = dataset.windows;
  Trained<LstmRegressor> out;
  out.model = LstmRegressor::create(hidden, cfg.seed, static_cast<int>(dataset.rows.front().features.cols()));
  out.model.context = context;

  auto targets = [&](std::span<const std::size_t> idx) {
    Eigen::RowVectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) y(static_cast<Eigen::Index>(i)) = dataset.rows[idx[i]].label / context.horizon;
    return y;
  };
  auto batch_loss = [&](const LstmRegressor& m, std::span<const std::size_t> idx, LstmRegressor& grad) {
    const int b = static_cast<int>(idx.size());
    return m.loss_and_gradients(nn::pack_sequences(gather(dataset, idx)), steps, b, targets(idx), grad);
  };
  auto eval_loss = [&](const LstmRegressor& m, std::span<const std::size_t> idx) {
    return chunked_mean(idx, [&](std::span<const std::size_t> part) {
      const int b = static_cast<int>(part.size());
      return nn::mse(m.forward(nn::pack_sequences(gather(dataset, part)), steps, b), targets(part));
    });
  };
  out.curve = fit(out.model, dataset.size(), cfg, batch_loss, eval_loss);
  return out;
}

Trained<SeqAutoencoder> train_autoencoder(const Dataset& dataset, int codeword, const TrainConfig& cfg,
                                          const ModelContext& context) {
  require_rows(dataset);
  const int steps = dataset.windows;
  const auto dim = static_cast<int>(dataset.rows.front().features.cols());
  if (codeword >= steps * dim) {
    throw UsageError("codeword length " + std::to_string(codeword) + " must be smaller than the flattened length " +
                     std::to_string(steps * dim));
  }
  Trained<SeqAutoencoder> out;
  out.model = SeqAutoencoder::create(codeword, cfg.seed, {}, {}, dim);
  out.model.context = context;

  auto batch_loss = [&](const SeqAutoencoder& m, std::span<const std::size_t> idx, SeqAutoencoder& grad) {
    const int b = static_cast<int>(idx.size());
    return m.loss_and_gradients(nn::pack_sequences(gather(dataset, idx)), steps, b, grad);
  };
  auto eval_loss = [&](const SeqAutoencoder& m, std::span<const std::size_t> idx) {
    return chunked_mean(idx, [&](std::span<const std::size_t> part) {
      const nn::Matrix x = nn::pack_sequences(gather(dataset, part));
      return nn::mse(m.reconstruct(x, steps, static_cast<int>(part.size())), x);
    });
  };
  out.curve = fit(out.model, dataset.size(), cfg, batch_loss, eval_loss);
  return out;
}

Trained<MlpRegressor> train_mlp(const nn::Matrix& codewords, const std::vector<double>& labels,
                                const std::vector<int>& hidden, const TrainConfig& cfg, const ModelContext& context,
                                std::uint64_t encoder_fingerprint) {
  if (codewords.cols() == 0) throw DataError("no codewords to train on");
  if (static_cast<std::size_t>(codewords.cols()) != labels.size()) {
    throw DataError("codeword count does not match label count");
  }
  Trained<MlpRegressor> out;
  out.model = MlpRegressor::create(static_cast<int>(codewords.rows()), hidden, cfg.seed);
  out.model.context = context;
  out.model.encoder_fingerprint = encoder_fingerprint;

  auto select = [&](std::span<const std::size_t> idx) {
    nn::Matrix x(codewords.rows(), static_cast<Eigen::Index>(idx.size()));
    Eigen::RowVectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      x.col(static_cast<Eigen::Index>(i)) = codewords.col(static_cast<Eigen::Index>(idx[i]));
      y(static_cast<Eigen::Index>(i)) = labels[idx[i]] / context.horizon;
    }
    return std::pair{std::move(x), std::move(y)};
  };
  auto batch_loss = [&](const MlpRegressor& m, std::span<const std::size_t> idx, MlpRegressor& grad) {
    const auto [x, y] = select(idx);
    return m.loss_and_gradients(x, y, grad);
  };
  auto eval_loss = [&](const MlpRegressor& m, std::span<const std::size_t> idx) {
    const auto [x, y] = select(idx);
    return nn::mse(m.forward(x), y);
  };
  out.curve = fit(out.model, labels.size(), cfg, batch_loss, eval_loss);
  return out;
}

Trained<MlpRegressor> train_mlp(const SeqAutoencoder& ae, const Dataset& dataset, const std::vector<int>& hidden,
                                const TrainConfig& cfg) {
  require_rows(dataset);
  if (dataset.rows.front().features.cols() != ae.input_dim()) {
    throw DataError("dataset feature count does not match the encoder input");
  }
  const nn::Matrix cw = encode_all(ae, sequence_pointers(dataset));
  return train_mlp(cw, labels_of(dataset), hidden, cfg, ae.context, encoder_checksum(ae));
}

}  // namespace holab
