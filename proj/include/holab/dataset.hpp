#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "holab/features.hpp"
#include "holab/handover.hpp"

namespace holab {

/// Row-major windows x features.
using SequenceMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SequenceMeta {
  int run_id = 0;
  int ue_id = 0;
  int rank = 0;
  int target_cell = 0;
  friend bool operator==(const SequenceMeta&, const SequenceMeta&) = default;
};

/// One row of the dataset matrix: a full run of one UE under one forced target.
struct LabeledSequence {
  SequenceMatrix features;  // windows x kNumFeatures
  double label = 0.0;       // download time, s
  SequenceMeta meta;
};

struct Dataset {
  int windows = 0;  // timesteps per sequence
  std::vector<LabeledSequence> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

LabeledSequence to_sequence(const TraceLog& trace);

/// One row per trace. Every trace must have exactly `windows` windows.
Dataset build_dataset(std::span<const TraceLog> traces, int windows);

/// Per-feature min/max over the training runs.
struct NormalizationSpec {
  std::vector<double> min;
  std::vector<double> max;

  /// Maps every feature onto itself, i.e. the [0, 1] box.
  static NormalizationSpec identity(int features = kNumFeatures);
  std::uint64_t fingerprint() const;
  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

inline constexpr double kNormalizedLow = -0.5;
inline constexpr double kNormalizedHigh = 1.5;

NormalizationSpec fit_normalizer(const Dataset& dataset, std::span<const int> train_run_ids);

/// Min-max scales every feature with `spec`; constant features map to 0 and
/// the result is clipped to [-0.5, 1.5].
Dataset normalize(const Dataset& dataset, const NormalizationSpec& spec);
SequenceMatrix normalize(const SequenceMatrix& features, const NormalizationSpec& spec);

/// Window-major flattening: row 0 first.
Eigen::VectorXd flatten_for_inference(const LabeledSequence& seq);
SequenceMatrix reshape_flat(const Eigen::VectorXd& flat, int windows, int features = kNumFeatures);

/// Splits by run: rows whose run_id is in `ids` go to the first dataset.
std::pair<Dataset, Dataset> split_by_runs(const Dataset& dataset, std::span<const int> ids);
std::vector<int> run_ids(const Dataset& dataset);

enum class DatasetFormat { Csv, Binary };

DatasetFormat format_from_path(const std::filesystem::path& path);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

inline void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  save_dataset(dataset, path, format_from_path(path));
}
inline Dataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, format_from_path(path));
}

}  // namespace holab
