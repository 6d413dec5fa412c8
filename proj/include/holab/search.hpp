#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "holab/training.hpp"

namespace holab {

enum class SelectionMetric { MeanOverEpochs, FinalEpoch };

SelectionMetric parse_selection_metric(const std::string& name);
std::string to_string(SelectionMetric metric);

struct SearchEntry {
  std::string candidate;  // e.g. "lstm[84x62]", "cw=100", "mlp[80x40]"
  std::vector<int> layout;
  std::size_t parameters = 0;
  double mean_val_mse = 0.0;
  double final_val_mse = 0.0;
  double score = 0.0;  // the value ranked on
};

/// Candidates sorted best first: lowest score, ties to fewer parameters.
struct SearchReport {
  std::string family;
  SelectionMetric metric = SelectionMetric::MeanOverEpochs;
  std::vector<SearchEntry> ranked;

  const SearchEntry& best() const;
};

/// Three depths times three widths, scaled from the 84x62x42 stack.
std::vector<std::vector<int>> default_lstm_grid();
std::vector<int> default_codeword_grid();
std::vector<std::vector<int>> default_mlp_grid();

SearchReport search_lstm(const Dataset& dataset, const std::vector<std::vector<int>>& grid, const TrainConfig& cfg,
                         SelectionMetric metric = SelectionMetric::MeanOverEpochs, const ModelContext& context = {});
SearchReport search_autoencoder(const Dataset& dataset, const std::vector<int>& codewords, const TrainConfig& cfg,
                                SelectionMetric metric = SelectionMetric::MeanOverEpochs,
                                const ModelContext& context = {});
SearchReport search_mlp(const SeqAutoencoder& ae, const Dataset& dataset, const std::vector<std::vector<int>>& grid,
                        const TrainConfig& cfg, SelectionMetric metric = SelectionMetric::MeanOverEpochs);

/// Sorts in place by score, then parameter count, then candidate name.
void rank_entries(std::vector<SearchEntry>& entries);

/// CSV: rank,candidate,parameters,mean_val_mse,final_val_mse
void write_search_report(const SearchReport& report, std::ostream& out);

std::string layout_string(const std::vector<int>& layout);

}  // namespace holab
