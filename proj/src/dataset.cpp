#include "holab/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "holab/error.hpp"

namespace holab {

namespace {

constexpr std::array<char, 4> kDatasetMagic = {'H', 'O', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <class T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw DataError(std::string("truncated dataset file while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DataError(std::string("non-finite value in ") + what);
}

bool contains(std::span<const int> ids, int id) { return std::find(ids.begin(), ids.end(), id) != ids.end(); }

void save_binary(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(kDatasetMagic.data(), kDatasetMagic.size());
  put_le<std::uint32_t>(out, kDatasetVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.rows.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.windows));
  put_le<std::uint32_t>(out, kNumFeatures);
  for (const LabeledSequence& row : d.rows) {
    put_le<std::int32_t>(out, row.meta.run_id);
    put_le<std::int32_t>(out, row.meta.ue_id);
    put_le<std::int32_t>(out, row.meta.rank);
    put_le<std::int32_t>(out, row.meta.target_cell);
    put_le<float>(out, static_cast<float>(row.label));
    for (Eigen::Index i = 0; i < row.features.size(); ++i) {
      put_le<float>(out, static_cast<float>(row.features.data()[i]));
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Dataset load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kDatasetMagic) {
    throw DataError("bad dataset header in " + path.string());
  }
  if (get_le<std::uint32_t>(in, "version") != kDatasetVersion) throw DataError("unsupported dataset version");
  const auto n = get_le<std::uint32_t>(in, "row count");
  const auto m = get_le<std::uint32_t>(in, "window count");
  const auto f = get_le<std::uint32_t>(in, "feature count");
  if (f != kNumFeatures) throw DataError("dataset feature count " + std::to_string(f) + " != 84");
  if (m == 0 && n > 0) throw DataError("dataset rows with zero windows");

  // Reject impossible sizes before allocating.
  const auto start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto available = static_cast<std::uint64_t>(in.tellg() - start);
  in.seekg(start);
  const std::uint64_t row_bytes = 4 * 4 + 4 + 4ull * m * f;
  if (available != row_bytes * n) throw DataError("dataset body size does not match header (truncated or padded)");

  Dataset d;
  d.windows = static_cast<int>(m);
  d.rows.resize(n);
  for (auto& row : d.rows) {
    row.meta.run_id = get_le<std::int32_t>(in, "run id");
    row.meta.ue_id = get_le<std::int32_t>(in, "ue id");
    row.meta.rank = get_le<std::int32_t>(in, "rank");
    row.meta.target_cell = get_le<std::int32_t>(in, "target cell");
    row.label = get_le<float>(in, "label");
    require_finite(row.label, "label");
    row.features.resize(m, f);
    for (Eigen::Index i = 0; i < row.features.size(); ++i) {
      const double v = get_le<float>(in, "features");
      require_finite(v, "features");
      row.features.data()[i] = v;
    }
  }
  return d;
}

constexpr int kMetaColumns = 6;  // window, label, run_id, ue_id, rank, target_cell

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (int i = 1; i <= kNumFeatures; ++i) out << feature_name(i) << ',';
  out << "window,label,run_id,ue_id,rank,target_cell\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const LabeledSequence& row : d.rows) {
    for (Eigen::Index w = 0; w < row.features.rows(); ++w) {
      for (Eigen::Index c = 0; c < row.features.cols(); ++c) out << row.features(w, c) << ',';
      out << w << ',' << row.label << ',' << row.meta.run_id << ',' << row.meta.ue_id << ','
          << row.meta.rank << ',' << row.meta.target_cell << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV dataset " + path.string());
  {
    std::ostringstream expected;
    for (int i = 1; i <= kNumFeatures; ++i) expected << feature_name(i) << ',';
    expected << "window,label,run_id,ue_id,rank,target_cell";
    if (line != expected.str()) throw DataError("CSV header does not match the feature schema");
  }

  Dataset d;
  std::vector<std::array<double, kNumFeatures>> pending;
  LabeledSequence current;
  auto flush = [&] {
    if (pending.empty()) return;
    const int m = static_cast<int>(pending.size());
    if (d.rows.empty()) {
      d.windows = m;
    } else if (m != d.windows) {
      throw DataError("CSV sequence with " + std::to_string(m) + " windows, expected " + std::to_string(d.windows));
    }
    current.features.resize(m, kNumFeatures);
    for (int w = 0; w < m; ++w) {
      for (int c = 0; c < kNumFeatures; ++c) current.features(w, c) = pending[w][c];
    }
    d.rows.push_back(current);
    pending.clear();
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<double, kNumFeatures + kMetaColumns> v{};
    std::size_t pos = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::size_t end = line.find(',', pos);
      const bool last = k + 1 == v.size();
      if ((end == std::string::npos) != last) {
        throw DataError("CSV line " + std::to_string(line_no) + " has the wrong column count");
      }
      const std::string cell = line.substr(pos, last ? std::string::npos : end - pos);
      char* stop = nullptr;
      v[k] = std::strtod(cell.c_str(), &stop);
      if (cell.empty() || *stop != '\0') throw DataError("CSV line " + std::to_string(line_no) + ": bad number");
      require_finite(v[k], "CSV dataset");
      pos = end + 1;
    }
    const int window = static_cast<int>(v[kNumFeatures]);
    SequenceMeta meta{static_cast<int>(v[kNumFeatures + 2]), static_cast<int>(v[kNumFeatures + 3]),
                      static_cast<int>(v[kNumFeatures + 4]), static_cast<int>(v[kNumFeatures + 5])};
    if (window == 0) {
      flush();
      current = LabeledSequence{};
      current.meta = meta;
      current.label = v[kNumFeatures + 1];
    } else if (window != static_cast<int>(pending.size()) || !(meta == current.meta)) {
      throw DataError("CSV line " + std::to_string(line_no) + ": windows out of order");
    }
    std::array<double, kNumFeatures> row{};
    std::copy_n(v.begin(), kNumFeatures, row.begin());
    pending.push_back(row);
  }
  flush();
  return d;
}

}  // namespace

LabeledSequence to_sequence(const TraceLog& trace) {
  LabeledSequence seq;
  seq.features.resize(static_cast<Eigen::Index>(trace.windows.size()), kNumFeatures);
  for (std::size_t w = 0; w < trace.windows.size(); ++w) {
    for (int c = 0; c < kNumFeatures; ++c) seq.features(static_cast<Eigen::Index>(w), c) = trace.windows[w][c];
  }
  seq.label = trace.download_time;
  seq.meta = {trace.run_id, trace.ue_id, trace.rank, trace.target_cell};
  return seq;
}

Dataset build_dataset(std::span<const TraceLog> traces, int windows) {
  Dataset d;
  d.windows = windows;
  d.rows.reserve(traces.size());
  for (const TraceLog& t : traces) {
    if (static_cast<int>(t.windows.size()) != windows) {
      throw DataError("trace for ue " + std::to_string(t.ue_id) + " has " + std::to_string(t.windows.size()) +
                      " windows, expected " + std::to_string(windows));
    }
    d.rows.push_back(to_sequence(t));
  }
  return d;
}

NormalizationSpec NormalizationSpec::identity(int features) {
  return {std::vector<double>(features, 0.0), std::vector<double>(features, 1.0)};
}

std::uint64_t NormalizationSpec::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto eat = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (double v : min) eat(v);
  for (double v : max) eat(v);
  return h;
}

NormalizationSpec fit_normalizer(const Dataset& dataset, std::span<const int> train_run_ids) {
  if (train_run_ids.empty()) throw UsageError("normalizer needs at least one training run");
  NormalizationSpec spec;
  spec.min.assign(kNumFeatures, std::numeric_limits<double>::infinity());
  spec.max.assign(kNumFeatures, -std::numeric_limits<double>::infinity());
  bool any = false;
  for (const LabeledSequence& row : dataset.rows) {
    if (!contains(train_run_ids, row.meta.run_id)) continue;
    any = true;
    const Eigen::RowVectorXd lo = row.features.colwise().minCoeff();
    const Eigen::RowVectorXd hi = row.features.colwise().maxCoeff();
    for (int c = 0; c < kNumFeatures; ++c) {
      spec.min[c] = std::min(spec.min[c], lo(c));
      spec.max[c] = std::max(spec.max[c], hi(c));
    }
  }
  if (!any) throw UsageError("training split is empty: no rows carry the requested run ids");
  return spec;
}

SequenceMatrix normalize(const SequenceMatrix& features, const NormalizationSpec& spec) {
  if (static_cast<std::size_t>(features.cols()) != spec.min.size()) {
    throw DataError("normalization spec width does not match features");
  }
  SequenceMatrix out(features.rows(), features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double lo = spec.min[c];
    const double span = spec.max[c] - lo;
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      const double v = span > 0.0 ? (features(r, c) - lo) / span : 0.0;
      out(r, c) = std::clamp(v, kNormalizedLow, kNormalizedHigh);
    }
  }
  return out;
}

Dataset normalize(const Dataset& dataset, const NormalizationSpec& spec) {
  Dataset out;
  out.windows = dataset.windows;
  out.rows.reserve(dataset.rows.size());
  for (const LabeledSequence& row : dataset.rows) {
    LabeledSequence n = row;
    n.features = normalize(row.features, spec);
    out.rows.push_back(std::move(n));
  }
  return out;
}

Eigen::VectorXd flatten_for_inference(const LabeledSequence& seq) {
  // Row-major storage is already window-major.
  return Eigen::Map<const Eigen::VectorXd>(seq.features.data(), seq.features.size());
}

SequenceMatrix reshape_flat(const Eigen::VectorXd& flat, int windows, int features) {
  if (flat.size() != static_cast<Eigen::Index>(windows) * features) {
    throw std::invalid_argument("flat vector length does not match windows x features");
  }
  return Eigen::Map<const SequenceMatrix>(flat.data(), windows, features);
}

std::pair<Dataset, Dataset> split_by_runs(const Dataset& dataset, std::span<const int> ids) {
  std::pair<Dataset, Dataset> out;
  out.first.windows = dataset.windows;
  out.second.windows = dataset.windows;
  for (const LabeledSequence& row : dataset.rows) {
    (contains(ids, row.meta.run_id) ? out.first : out.second).rows.push_back(row);
  }
  return out;
}

std::vector<int> run_ids(const Dataset& dataset) {
  std::set<int> ids;
  for (const LabeledSequence& row : dataset.rows) ids.insert(row.meta.run_id);
  return {ids.begin(), ids.end()};
}

DatasetFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::Csv : DatasetFormat::Binary;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format) {
  for (const LabeledSequence& row : dataset.rows) {
    if (row.features.rows() != dataset.windows || row.features.cols() != kNumFeatures) {
      throw DataError("dataset row shape does not match its window count");
    }
    require_finite(row.label, "label");
    if (!row.features.allFinite()) throw DataError("non-finite feature value");
  }
  if (format == DatasetFormat::Csv) {
    save_csv(dataset, path);
  } else {
    save_binary(dataset, path);
  }
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  return format == DatasetFormat::Csv ? load_csv(path) : load_binary(path);
}

}  // namespace holab
