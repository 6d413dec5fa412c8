#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "holab/scenario.hpp"
#include "holab/search.hpp"
#include "holab/training.hpp"

namespace holab {

struct ModelConfig {
  std::vector<int> lstm_hidden{84, 62, 42};
  int codeword = 100;
  std::vector<int> mlp_hidden{80, 40};
  int eval_run = 0;  // 0 selects num_runs + 1
  std::uint64_t alt_obstacle_seed = 2;
  SelectionMetric selection_metric = SelectionMetric::MeanOverEpochs;
};

struct AppConfig {
  ScenarioConfig scenario;
  TrainConfig train;
  ModelConfig model;

  int eval_run_seed() const { return model.eval_run > 0 ? model.eval_run : scenario.num_runs + 1; }
};

/// Applies one `key = value` assignment. Throws UsageError for unknown keys
/// (listing the valid ones) and for unparsable values.
void apply_setting(AppConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines; `#` starts a comment, blank lines are skipped.
void apply_config(AppConfig& config, std::istream& in, const std::string& source = "config");
AppConfig load_config(const std::filesystem::path& path);

std::vector<std::string> config_keys();

std::vector<int> parse_int_list(const std::string& text);

}  // namespace holab
