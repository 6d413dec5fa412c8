#include "holab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "holab/error.hpp"

namespace holab {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int count_finishers(const std::vector<double>& times, double horizon) {
  return static_cast<int>(std::count_if(times.begin(), times.end(), [&](double t) { return t < horizon; }));
}

PolicyOutcome score_picks(std::string name, const std::vector<int>& picks,
                          const std::vector<std::vector<double>>& realized, double horizon) {
  PolicyOutcome p;
  p.name = std::move(name);
  p.rank = picks;
  for (std::size_t u = 0; u < picks.size(); ++u) {
    p.download_time.push_back(realized[u][picks[u] - 1]);
    p.regret.push_back(regret(realized[u], picks[u]));
  }
  p.finishing_count = count_finishers(p.download_time, horizon);
  return p;
}

}  // namespace

int select_target(const std::vector<double>& predictions) {
  if (predictions.empty()) throw UsageError("select_target needs at least one prediction");
  return static_cast<int>(std::min_element(predictions.begin(), predictions.end()) - predictions.begin()) + 1;
}

OraclePick oracle_select(const std::vector<double>& realized) {
  if (realized.empty()) throw UsageError("oracle_select needs at least one realized time");
  const int k = select_target(realized);
  return {k, realized[k - 1]};
}

double regret(const std::vector<double>& realized, int pick) {
  if (pick < 1 || pick > static_cast<int>(realized.size())) throw UsageError("pick outside the realized ranks");
  return realized[pick - 1] - oracle_select(realized).time;
}

double EcdfSeries::at(double v) const {
  const auto it = std::upper_bound(x.begin(), x.end(), v);
  return it == x.begin() ? 0.0 : F[static_cast<std::size_t>(it - x.begin()) - 1];
}

EcdfSeries ecdf(const std::vector<double>& values) {
  if (values.empty()) throw UsageError("ecdf of an empty sample");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  EcdfSeries s;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    s.x.push_back(v[i]);
    s.F.push_back(static_cast<double>(i + 1) / n);
  }
  return s;
}

void write_ecdf_csv(const EcdfSeries& series, std::ostream& out) {
  const auto old = out.precision(10);
  out << "x,F\n";
  for (std::size_t i = 0; i < series.x.size(); ++i) out << series.x[i] << ',' << series.F[i] << '\n';
  out.precision(old);
}

Predictor make_predictor(const LstmRegressor& model, std::string name) {
  return {std::move(name), model.context.normalization.fingerprint(),
          [model](const std::vector<const SequenceMatrix*>& seqs) { return predict_download_times(model, seqs); }};
}

Predictor make_predictor(const SeqAutoencoder& ae, const MlpRegressor& mlp, std::string name) {
  if (mlp.encoder_fingerprint != encoder_checksum(ae)) {
    throw DataError("MLP was trained on codewords from a different encoder");
  }
  if (mlp.context.normalization != ae.context.normalization) {
    throw DataError("autoencoder and MLP were trained with different normalization");
  }
  return {std::move(name), ae.context.normalization.fingerprint(),
          [ae, mlp](const std::vector<const SequenceMatrix*>& seqs) { return predict_download_times(ae, mlp, seqs); }};
}

double PolicyOutcome::median_regret() const { return median(regret); }

const PolicyOutcome& EvalReport::learned_policy(const std::string& name) const {
  for (const auto& p : learned) {
    if (p.name == name) return p;
  }
  throw UsageError("no learned policy named '" + name + "'");
}

double EvalReport::nonnegative_mass(std::size_t learned_index) const {
  const auto& d = differences.at(learned_index);
  if (d.empty()) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(std::count_if(d.begin(), d.end(), [](double v) { return v >= 0.0; })) /
         static_cast<double>(d.size());
}

EvalReport evaluate(const Scenario& scenario, const std::vector<Predictor>& predictors,
                    const NormalizationSpec& normalization, std::uint64_t eval_run_seed) {
  const std::uint64_t fp = normalization.fingerprint();
  for (const auto& p : predictors) {
    if (p.normalization_fingerprint != fp) {
      throw DataError("model '" + p.name + "' was trained with a different normalization than the evaluation data");
    }
  }
  const ScenarioConfig& cfg = scenario.config;
  const int ranks = cfg.max_neighbors;

  EvalReport rep;
  rep.run_id = static_cast<int>(eval_run_seed);
  rep.obstacle_seed = cfg.obstacle_seed;
  rep.horizon = cfg.sim_duration;

  const std::vector<TraceLog> bench = run_simulation(scenario, BenchmarkPolicy{}, eval_run_seed);
  const auto forced = run_forced_campaign(scenario, eval_run_seed);
  const std::size_t n = bench.size();
  rep.total_ues = static_cast<int>(n);

  rep.realized.assign(n, std::vector<double>(static_cast<std::size_t>(ranks)));
  for (int k = 0; k < ranks; ++k) {
    for (std::size_t u = 0; u < n; ++u) rep.realized[u][k] = forced[k][u].download_time;
  }

  rep.benchmark.name = "benchmark";
  rep.benchmark.rank.assign(n, 0);
  for (const auto& t : bench) rep.benchmark.download_time.push_back(t.download_time);
  rep.benchmark.finishing_count = count_finishers(rep.benchmark.download_time, rep.horizon);

  rep.benchmark_selector = score_picks("benchmark_selector", std::vector<int>(n, 1), rep.realized, rep.horizon);
  std::vector<int> oracle_picks;
  for (const auto& r : rep.realized) oracle_picks.push_back(oracle_select(r).rank);
  rep.oracle = score_picks("oracle", oracle_picks, rep.realized, rep.horizon);

  // Sequences for every (ue, k), normalized with the training spec.
  std::vector<SequenceMatrix> seqs;
  seqs.reserve(n * static_cast<std::size_t>(ranks));
  for (std::size_t u = 0; u < n; ++u) {
    for (int k = 0; k < ranks; ++k) seqs.push_back(normalize(to_sequence(forced[k][u]).features, normalization));
  }
  std::vector<const SequenceMatrix*> ptrs;
  for (const auto& s : seqs) ptrs.push_back(&s);

  for (const auto& p : predictors) {
    const std::vector<double> pred = p.predict(ptrs);
    if (pred.size() != ptrs.size()) throw DataError("predictor '" + p.name + "' returned the wrong number of values");
    std::vector<int> picks;
    for (std::size_t u = 0; u < n; ++u) {
      picks.push_back(select_target(std::vector<double>(pred.begin() + static_cast<std::ptrdiff_t>(u * ranks),
                                                        pred.begin() + static_cast<std::ptrdiff_t>((u + 1) * ranks))));
    }
    rep.learned.push_back(score_picks(p.name, picks, rep.realized, rep.horizon));
  }

  for (std::size_t u = 0; u < n; ++u) {
    bool all = rep.benchmark.download_time[u] < rep.horizon;
    for (const auto& l : rep.learned) all = all && l.download_time[u] < rep.horizon;
    if (all) rep.common_finishers.push_back(static_cast<int>(u));
  }
  for (const auto& l : rep.learned) {
    std::vector<double> d;
    for (int u : rep.common_finishers) d.push_back(rep.benchmark.download_time[u] - l.download_time[u]);
    rep.differences.push_back(std::move(d));
  }
  return rep;
}

EvalReport cross_scenario_eval(const ScenarioConfig& config, std::uint64_t alternate_obstacle_seed,
                               const std::vector<Predictor>& predictors, const NormalizationSpec& normalization,
                               std::uint64_t eval_run_seed) {
  ScenarioConfig alt = config;
  alt.obstacle_seed = alternate_obstacle_seed;
  return evaluate(build_scenario(alt), predictors, normalization, eval_run_seed);
}

RelativeGain relative_gain(int benchmark_finishers, int learned_finishers) {
  const double diff = learned_finishers - benchmark_finishers;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {benchmark_finishers ? diff / benchmark_finishers : nan, learned_finishers ? diff / learned_finishers : nan};
}

void write_eval_text(const EvalReport& rep, std::ostream& out) {
  const auto old = out.precision(4);
  out << "run " << rep.run_id << ", obstacle seed " << rep.obstacle_seed << ", " << rep.total_ues << " UEs, horizon "
      << rep.horizon << " s\n";
  auto line = [&](const PolicyOutcome& p, bool with_regret) {
    out << "  " << p.name << ": " << p.finishing_count << "/" << rep.total_ues << " finish";
    if (with_regret) out << ", median regret " << p.median_regret() << " s";
    out << '\n';
  };
  line(rep.benchmark, false);
  line(rep.benchmark_selector, true);
  line(rep.oracle, true);
  for (const auto& l : rep.learned) line(l, true);
  out << "common finishers: " << rep.common_finishers.size() << '\n';
  for (std::size_t i = 0; i < rep.learned.size(); ++i) {
    const RelativeGain g = relative_gain(rep.benchmark.finishing_count, rep.learned[i].finishing_count);
    const auto& d = rep.differences[i];
    const auto improved = std::count_if(d.begin(), d.end(), [](double v) { return v > 0; });
    out << "  " << rep.learned[i].name << ": finishers change " << 100 * g.over_benchmark << "% of benchmark, "
        << 100 * g.over_learned << "% of learned; faster for " << improved << " of " << d.size()
        << " common UEs; mass at x >= 0: " << rep.nonnegative_mass(i) << '\n';
  }
  out.precision(old);
}

void write_eval_csv(const EvalReport& rep, std::ostream& out) {
  const auto old = out.precision(10);
  out << "ue_id,benchmark_time,oracle_rank,oracle_time";
  for (const auto& l : rep.learned) out << ',' << l.name << "_rank," << l.name << "_time," << l.name << "_regret";
  out << '\n';
  for (int u = 0; u < rep.total_ues; ++u) {
    out << u << ',' << rep.benchmark.download_time[u] << ',' << rep.oracle.rank[u] << ',' << rep.oracle.download_time[u];
    for (const auto& l : rep.learned) out << ',' << l.rank[u] << ',' << l.download_time[u] << ',' << l.regret[u];
    out << '\n';
  }
  out.precision(old);
}

}  // namespace holab
