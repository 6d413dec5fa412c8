#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "holab/campaign.hpp"
#include "holab/models.hpp"

namespace holab {

/// 1-based rank of the smallest prediction; ties go to the smaller rank.
int select_target(const std::vector<double>& predictions);

struct OraclePick {
  int rank = 0;
  double time = 0.0;
};
OraclePick oracle_select(const std::vector<double>& realized);

/// realized[pick - 1] minus the oracle time; never negative.
double regret(const std::vector<double>& realized, int pick);

/// Distinct sorted sample values with F(x) = fraction of samples <= x.
struct EcdfSeries {
  std::vector<double> x;
  std::vector<double> F;

  double at(double v) const;
};
EcdfSeries ecdf(const std::vector<double>& values);
void write_ecdf_csv(const EcdfSeries& series, std::ostream& out);

/// Maps normalized sequences to predicted download times.
struct Predictor {
  std::string name;
  std::uint64_t normalization_fingerprint = 0;
  std::function<std::vector<double>(const std::vector<const SequenceMatrix*>&)> predict;
};

Predictor make_predictor(const LstmRegressor& model, std::string name = "lstm");
/// Throws DataError if the MLP was trained on a different encoder.
Predictor make_predictor(const SeqAutoencoder& ae, const MlpRegressor& mlp, std::string name = "ae_mlp");

struct PolicyOutcome {
  std::string name;
  std::vector<int> rank;            // per UE; 0 for the benchmark
  std::vector<double> download_time;  // per UE, s
  std::vector<double> regret;       // per UE vs oracle; empty for the benchmark
  int finishing_count = 0;

  double median_regret() const;
};

struct EvalReport {
  int run_id = 0;
  std::uint64_t obstacle_seed = 0;
  int total_ues = 0;
  double horizon = 0.0;
  /// realized[ue][k - 1] from the forced campaign.
  std::vector<std::vector<double>> realized;
  PolicyOutcome benchmark;
  /// The benchmark's own target choice (strongest neighbor) scored as a selector.
  PolicyOutcome benchmark_selector;
  PolicyOutcome oracle;
  std::vector<PolicyOutcome> learned;
  std::vector<int> common_finishers;            // ue ids, ascending
  std::vector<std::vector<double>> differences;  // per learned policy: benchmark - learned over common UEs

  const PolicyOutcome& learned_policy(const std::string& name) const;
  /// Fraction of a learned policy's differences that are >= 0.
  double nonnegative_mass(std::size_t learned_index) const;
};

/// Runs the benchmark and all forced campaigns on `eval_run_seed`, scores
/// each predictor's per-UE pick against the realized forced outcomes.
/// Predictors must share `normalization`.
EvalReport evaluate(const Scenario& scenario, const std::vector<Predictor>& predictors,
                    const NormalizationSpec& normalization, std::uint64_t eval_run_seed);

/// Same as evaluate with obstacles re-dropped from `alternate_obstacle_seed`.
EvalReport cross_scenario_eval(const ScenarioConfig& config, std::uint64_t alternate_obstacle_seed,
                               const std::vector<Predictor>& predictors, const NormalizationSpec& normalization,
                               std::uint64_t eval_run_seed);

/// Relative finishing-count change of `learned` over `benchmark`, measured
/// against each of the two possible denominators.
struct RelativeGain {
  double over_benchmark = 0.0;
  double over_learned = 0.0;
};
RelativeGain relative_gain(int benchmark_finishers, int learned_finishers);

void write_eval_text(const EvalReport& report, std::ostream& out);
/// One row per UE with each policy's rank, time and regret.
void write_eval_csv(const EvalReport& report, std::ostream& out);

}  // namespace holab
