#include <doctest.h>

#include <sstream>

#include "holab/error.hpp"
#include "holab/evaluation.hpp"
#include "holab/rng.hpp"
#include "test_util.hpp"

using namespace holab;

namespace {

// Predicts a fixed time per rank, so every UE picks the same rank.
Predictor fixed_rank(int rank, int ranks, const NormalizationSpec& spec) {
  return {"rank" + std::to_string(rank), spec.fingerprint(), [rank, ranks](const std::vector<const SequenceMatrix*>& s) {
            std::vector<double> out(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) out[i] = static_cast<int>(i % ranks) + 1 == rank ? 1.0 : 2.0;
            return out;
          }};
}

NormalizationSpec fitted_spec(const Scenario& s) {
  const Dataset d = build_campaign_dataset(s, 1);
  return fit_normalizer(d, run_ids(d));
}

}  // namespace

TEST_SUITE("eval-cli") {

TEST_CASE("target selection and oracle") {
  CHECK(select_target({3.0, 1.0, 1.0, 5.0}) == 2);
  CHECK(select_target({7.0}) == 1);
  CHECK_THROWS_AS(select_target({}), UsageError);
  const auto o = oracle_select({4.0, 2.5, 9.0});
  CHECK(o.rank == 2);
  CHECK(o.time == 2.5);
  CHECK(regret({4.0, 2.5, 9.0}, 1) == 1.5);
  CHECK(regret({4.0, 2.5, 9.0}, 2) == 0.0);
  CHECK_THROWS_AS(regret({4.0}, 2), UsageError);
}

TEST_CASE("regret is never negative") {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> r(1 + rng.below(8));
    for (double& v : r) v = rng.uniform(0, 40);
    const int pick = 1 + static_cast<int>(rng.below(r.size()));
    CHECK(regret(r, pick) >= 0.0);
    CHECK(regret(r, oracle_select(r).rank) == 0.0);
  }
}

TEST_CASE("ECDF steps") {
  const EcdfSeries e = ecdf({3.0, -1.0, 3.0, 0.0});
  CHECK(e.x == std::vector<double>{-1.0, 0.0, 3.0});
  CHECK(e.F == std::vector<double>{0.25, 0.5, 1.0});
  CHECK(e.at(-2.0) == 0.0);
  CHECK(e.at(0.0) == 0.5);
  CHECK(e.at(2.9) == 0.5);
  CHECK(e.at(10.0) == 1.0);
  CHECK_THROWS_AS(ecdf({}), UsageError);
  std::ostringstream out;
  write_ecdf_csv(e, out);
  CHECK(out.str() == "x,F\n-1,0.25\n0,0.5\n3,1\n");
}

TEST_CASE("ECDF is monotone and ends at 1") {
  Rng rng(5);
  std::vector<double> v(300);
  for (double& x : v) x = std::round(rng.uniform(-20, 20));
  const EcdfSeries e = ecdf(v);
  for (std::size_t i = 1; i < e.x.size(); ++i) {
    CHECK(e.x[i] > e.x[i - 1]);
    CHECK(e.F[i] > e.F[i - 1]);
  }
  CHECK(e.F.back() == 1.0);
}

TEST_CASE("relative gain reports both denominators") {
  const RelativeGain g = relative_gain(63, 77);
  CHECK(g.over_benchmark == doctest::Approx(14.0 / 63));
  CHECK(g.over_learned == doctest::Approx(14.0 / 77));
  CHECK(std::abs(100 * g.over_learned - 18.18) < 0.01);
  CHECK(relative_gain(78, 88).over_learned == doctest::Approx(10.0 / 88));
  CHECK(std::isnan(relative_gain(0, 0).over_benchmark));
}

TEST_CASE("evaluation scores picks against the forced outcomes") {
  ScenarioConfig c = test::tiny_config();
  c.sim_duration = 6.0;
  c.file_size = 5'000'000;
  const Scenario s = build_scenario(c);
  const NormalizationSpec spec = fitted_spec(s);
  const EvalReport rep = evaluate(s, {fixed_rank(1, 8, spec), fixed_rank(3, 8, spec)}, spec, 4);

  CHECK(rep.run_id == 4);
  CHECK(rep.total_ues == 3);
  REQUIRE(rep.realized.size() == 3);
  CHECK(rep.realized[0].size() == 8);
  const auto& r1 = rep.learned_policy("rank1");
  const auto& r3 = rep.learned_policy("rank3");
  CHECK_THROWS_AS(rep.learned_policy("nope"), UsageError);
  for (int u = 0; u < 3; ++u) {
    CHECK(r1.rank[u] == 1);
    CHECK(r3.rank[u] == 3);
    CHECK(r1.download_time[u] == rep.realized[u][0]);
    CHECK(r3.download_time[u] == rep.realized[u][2]);
    CHECK(rep.oracle.regret[u] == 0.0);
    CHECK(r3.regret[u] >= 0.0);
    CHECK(rep.oracle.download_time[u] <= r3.download_time[u]);
  }
  CHECK(r1.download_time == rep.benchmark_selector.download_time);
  CHECK(rep.oracle.finishing_count >= r1.finishing_count);
  CHECK(rep.oracle.finishing_count >= r3.finishing_count);
  REQUIRE(rep.differences.size() == 2);
  CHECK(rep.differences[0].size() == rep.common_finishers.size());
  for (std::size_t i = 0; i < rep.common_finishers.size(); ++i) {
    const int u = rep.common_finishers[i];
    CHECK(rep.differences[1][i] == rep.benchmark.download_time[u] - r3.download_time[u]);
  }
  if (!rep.common_finishers.empty()) {
    CHECK(rep.nonnegative_mass(0) >= 0.0);
    CHECK(rep.nonnegative_mass(0) <= 1.0);
  }

  std::ostringstream csv, txt;
  write_eval_csv(rep, csv);
  write_eval_text(rep, txt);
  const std::string rows = csv.str();
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 4);
  CHECK(txt.str().find("rank3") != std::string::npos);
}

TEST_CASE("evaluation refuses mismatched normalization") {
  const Scenario s = build_scenario(test::tiny_config());
  const NormalizationSpec spec = fitted_spec(s);
  CHECK_THROWS_AS(evaluate(s, {fixed_rank(1, 8, NormalizationSpec::identity())}, spec, 4), DataError);

  auto ae = SeqAutoencoder::create(3, 1, {}, {}, kNumFeatures);
  auto mlp = MlpRegressor::create(3, {4}, 1);
  mlp.context = ae.context;
  CHECK_THROWS_AS(make_predictor(ae, mlp), DataError);
  mlp.encoder_fingerprint = encoder_checksum(ae);
  CHECK_NOTHROW(make_predictor(ae, mlp));
  mlp.context.horizon = 40.0;
  mlp.context.normalization.max[0] = 2.0;
  CHECK_THROWS_AS(make_predictor(ae, mlp), DataError);
}

TEST_CASE("cross-scenario evaluation swaps only the obstacle layout") {
  const ScenarioConfig c = test::tiny_config();
  const Scenario s = build_scenario(c);
  const NormalizationSpec spec = fitted_spec(s);
  const EvalReport rep = cross_scenario_eval(c, 2, {fixed_rank(1, 8, spec)}, spec, 4);
  CHECK(rep.obstacle_seed == 2);
  CHECK(rep.total_ues == 3);
}

}
