#include "holab/search.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "holab/error.hpp"

namespace holab {

namespace {

SearchEntry entry_for(std::string name, std::vector<int> layout, std::size_t parameters, const LossCurve& curve,
                      SelectionMetric metric) {
  SearchEntry e{std::move(name), std::move(layout), parameters, curve.mean_val(), curve.final_val(), 0.0};
  e.score = metric == SelectionMetric::MeanOverEpochs ? e.mean_val_mse : e.final_val_mse;
  return e;
}

SearchReport finish(std::string family, SelectionMetric metric, std::vector<SearchEntry> entries) {
  rank_entries(entries);
  return {std::move(family), metric, std::move(entries)};
}

}  // namespace

SelectionMetric parse_selection_metric(const std::string& name) {
  if (name == "mean") return SelectionMetric::MeanOverEpochs;
  if (name == "final") return SelectionMetric::FinalEpoch;
  throw UsageError("selection_metric must be 'mean' or 'final', got '" + name + "'");
}

std::string to_string(SelectionMetric metric) { return metric == SelectionMetric::MeanOverEpochs ? "mean" : "final"; }

const SearchEntry& SearchReport::best() const {
  if (ranked.empty()) throw UsageError("search report is empty");
  return ranked.front();
}

std::vector<std::vector<int>> default_lstm_grid() {
  const std::vector<int> base{84, 62, 42};
  std::vector<std::vector<int>> grid;
  for (int depth = 1; depth <= 3; ++depth) {
    for (double scale : {1.0, 0.75, 0.5}) {
      std::vector<int> layout;
      for (int l = 0; l < depth; ++l) layout.push_back(static_cast<int>(std::lround(base[l] * scale)));
      grid.push_back(layout);
    }
  }
  return grid;
}

std::vector<int> default_codeword_grid() { return {25, 50, 100, 200, 400}; }

std::vector<std::vector<int>> default_mlp_grid() {
  return {{80, 40}, {80}, {40}, {40, 20}, {160, 80}, {120, 60}, {80, 40, 20}};
}

std::string layout_string(const std::vector<int>& layout) {
  std::string s;
  for (std::size_t i = 0; i < layout.size(); ++i) s += (i ? "x" : "") + std::to_string(layout[i]);
  return s;
}

void rank_entries(std::vector<SearchEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const SearchEntry& a, const SearchEntry& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.parameters != b.parameters) return a.parameters < b.parameters;
    return a.candidate < b.candidate;
  });
}

SearchReport search_lstm(const Dataset& dataset, const std::vector<std::vector<int>>& grid, const TrainConfig& cfg,
                         SelectionMetric metric, const ModelContext& context) {
  if (grid.empty()) throw UsageError("LSTM candidate grid is empty");
  std::vector<SearchEntry> entries;
  for (const auto& layout : grid) {
    const auto trained = train_lstm_regressor(dataset, layout, cfg, context);
    entries.push_back(entry_for("lstm[" + layout_string(layout) + "]", layout, trained.model.parameter_count(),
                                trained.curve, metric));
  }
  return finish("lstm", metric, std::move(entries));
}

SearchReport search_autoencoder(const Dataset& dataset, const std::vector<int>& codewords, const TrainConfig& cfg,
                                SelectionMetric metric, const ModelContext& context) {
  if (codewords.empty()) throw UsageError("codeword grid is empty");
  std::vector<SearchEntry> entries;
  for (int cw : codewords) {
    const auto trained = train_autoencoder(dataset, cw, cfg, context);
    entries.push_back(entry_for("cw=" + std::to_string(cw), {cw}, trained.model.parameter_count(), trained.curve, metric));
  }
  return finish("autoencoder", metric, std::move(entries));
}

SearchReport search_mlp(const SeqAutoencoder& ae, const Dataset& dataset, const std::vector<std::vector<int>>& grid,
                        const TrainConfig& cfg, SelectionMetric metric) {
  if (grid.empty()) throw UsageError("MLP candidate grid is empty");
  if (dataset.empty()) throw DataError("dataset is empty");
  const nn::Matrix cw = encode_all(ae, sequence_pointers(dataset));
  const std::vector<double> labels = labels_of(dataset);
  std::vector<SearchEntry> entries;
  for (const auto& layout : grid) {
    const auto trained = train_mlp(cw, labels, layout, cfg, ae.context, encoder_checksum(ae));
    entries.push_back(entry_for("mlp[" + layout_string(layout) + "]", layout, trained.model.parameter_count(),
                                trained.curve, metric));
  }
  return finish("mlp", metric, std::move(entries));
}

void write_search_report(const SearchReport& report, std::ostream& out) {
  const auto old = out.precision(10);
  out << "rank,candidate,parameters,mean_val_mse,final_val_mse\n";
  for (std::size_t i = 0; i < report.ranked.size(); ++i) {
    const auto& e = report.ranked[i];
    out << i + 1 << ',' << e.candidate << ',' << e.parameters << ',' << e.mean_val_mse << ',' << e.final_val_mse << '\n';
  }
  out.precision(old);
}

}  // namespace holab
