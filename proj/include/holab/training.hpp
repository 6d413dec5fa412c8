#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "holab/dataset.hpp"
#include "holab/models.hpp"

namespace holab {

struct TrainConfig {
  int batch_size = 32;
  int epochs = 200;
  double lr = 1e-3;
  double validation_fraction = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Per-epoch mean squared errors. With no validation split, val_mse repeats
/// a full pass over the training set.
struct LossCurve {
  std::vector<double> train_mse;
  std::vector<double> val_mse;
  int best_epoch = -1;  // 0-based epoch whose parameters were kept

  double mean_val() const;
  double final_val() const;
  double best_val() const;
};

void write_loss_curve(const LossCurve& curve, const std::filesystem::path& path);

/// Sample indices held out for validation: a seeded shuffle, the first
/// round(n * fraction) go to validation (at most n - 1).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_val_split(std::size_t n, double fraction,
                                                                               std::uint64_t seed);

template <class Model>
struct Trained {
  Model model;
  LossCurve curve;
};

/// Sequences must already be normalized. Labels are divided by `horizon`.
Trained<LstmRegressor> train_lstm_regressor(const Dataset& dataset, const std::vector<int>& hidden,
                                            const TrainConfig& cfg, const ModelContext& context = {});

Trained<SeqAutoencoder> train_autoencoder(const Dataset& dataset, int codeword, const TrainConfig& cfg,
                                          const ModelContext& context = {});

/// `codewords` is cw x n; `labels` are in seconds. The encoder is not touched.
Trained<MlpRegressor> train_mlp(const nn::Matrix& codewords, const std::vector<double>& labels,
                                const std::vector<int>& hidden, const TrainConfig& cfg, const ModelContext& context = {},
                                std::uint64_t encoder_fingerprint = 0);

/// Encodes every row of `dataset` and trains the MLP on the codewords.
Trained<MlpRegressor> train_mlp(const SeqAutoencoder& ae, const Dataset& dataset, const std::vector<int>& hidden,
                                const TrainConfig& cfg);

std::vector<const SequenceMatrix*> sequence_pointers(const Dataset& dataset);
std::vector<double> labels_of(const Dataset& dataset);

}  // namespace holab
