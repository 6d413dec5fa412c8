#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "holab/dataset.hpp"
#include "holab/nn/checkpoint.hpp"
#include "holab/nn/dense.hpp"
#include "holab/nn/lstm.hpp"

namespace holab {

/// Feature scaling and label horizon a model was trained with. Inference
/// must apply the same scaling.
struct ModelContext {
  NormalizationSpec normalization = NormalizationSpec::identity();
  double horizon = 40.0;  // s; labels are divided by this during training
};

/// Many-to-one LSTM stack with a linear 1-unit head.
struct LstmRegressor {
  nn::LstmStack lstm;
  nn::DenseParams head;
  ModelContext context;

  static LstmRegressor create(const std::vector<int>& hidden, std::uint64_t seed, int input_dim = kNumFeatures);
  LstmRegressor zeros_like() const;
  std::vector<nn::Matrix*> parameters();
  std::size_t parameter_count() const;

  /// Raw outputs (label / horizon scale) for a packed batch.
  Eigen::RowVectorXd forward(const nn::Matrix& x, int steps, int batch) const;
  /// Mean squared error against `target` and its gradients (added to `grad`).
  double loss_and_gradients(const nn::Matrix& x, int steps, int batch, const Eigen::RowVectorXd& target,
                            LstmRegressor& grad) const;

  std::string architecture() const;
  nn::Checkpoint to_checkpoint() const;
  static LstmRegressor from_checkpoint(const nn::Checkpoint& ckpt);
};

/// Sequence autoencoder: an LSTM encoder whose last hidden state is the
/// codeword, and an LSTM decoder fed that codeword at every timestep with a
/// per-timestep linear output layer.
struct SeqAutoencoder {
  nn::LstmStack encoder;
  nn::LstmStack decoder;
  nn::DenseParams output;
  ModelContext context;

  /// `encoder_hidden` lists the layers before the codeword layer.
  static SeqAutoencoder create(int codeword, std::uint64_t seed, const std::vector<int>& encoder_hidden = {},
                               const std::vector<int>& decoder_hidden = {}, int input_dim = kNumFeatures);
  SeqAutoencoder zeros_like() const;
  std::vector<nn::Matrix*> parameters();
  std::size_t parameter_count() const;
  int codeword_length() const { return encoder.output_dim(); }
  int input_dim() const { return encoder.input_dim(); }

  /// Codewords (cw x batch) for a packed batch.
  nn::Matrix encode(const nn::Matrix& x, int steps, int batch) const;
  /// Reconstruction (D x T*batch) in the packed layout.
  nn::Matrix reconstruct(const nn::Matrix& x, int steps, int batch) const;
  double loss_and_gradients(const nn::Matrix& x, int steps, int batch, SeqAutoencoder& grad) const;

  std::string architecture() const;
  nn::Checkpoint to_checkpoint() const;
  static SeqAutoencoder from_checkpoint(const nn::Checkpoint& ckpt);
};

/// Feed-forward regressor on codewords: relu hidden layers, linear output.
struct MlpRegressor {
  std::vector<nn::DenseParams> layers;
  ModelContext context;
  /// Fingerprint of the encoder whose codewords this MLP consumes.
  std::uint64_t encoder_fingerprint = 0;

  static MlpRegressor create(int input_dim, const std::vector<int>& hidden, std::uint64_t seed);
  MlpRegressor zeros_like() const;
  std::vector<nn::Matrix*> parameters();
  std::size_t parameter_count() const;
  int input_dim() const { return layers.front().in_dim(); }
  std::vector<int> hidden_sizes() const;

  Eigen::RowVectorXd forward(const nn::Matrix& codewords) const;
  double loss_and_gradients(const nn::Matrix& codewords, const Eigen::RowVectorXd& target, MlpRegressor& grad) const;

  std::string architecture() const;
  nn::Checkpoint to_checkpoint() const;
  static MlpRegressor from_checkpoint(const nn::Checkpoint& ckpt);
};

/// Order-sensitive hash of every parameter value.
std::uint64_t parameter_checksum(const std::vector<const nn::Matrix*>& params);
std::uint64_t encoder_checksum(const SeqAutoencoder& ae);

/// Throws DataError when any value lies outside the normalized range.
void require_normalized(const SequenceMatrix& features);

/// Model output in horizon units mapped to seconds, clamped to (0, horizon].
double predict_download_time(double raw_output, double horizon);

/// Normalized sequences in, predicted seconds out.
std::vector<double> predict_download_times(const LstmRegressor& model, const std::vector<const SequenceMatrix*>& seqs);
std::vector<double> predict_download_times(const SeqAutoencoder& ae, const MlpRegressor& mlp,
                                           const std::vector<const SequenceMatrix*>& seqs);

/// Codewords (cw x n) for normalized sequences, computed in chunks.
nn::Matrix encode_all(const SeqAutoencoder& ae, const std::vector<const SequenceMatrix*>& seqs);

template <class Model>
void save_model(const Model& model, const std::filesystem::path& path) {
  nn::save_checkpoint(model.to_checkpoint(), path);
}

template <class Model>
Model load_model(const std::filesystem::path& path) {
  return Model::from_checkpoint(nn::load_checkpoint(path));
}

}  // namespace holab
