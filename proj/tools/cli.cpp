#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "holab/campaign.hpp"
#include "holab/config_file.hpp"
#include "holab/error.hpp"
#include "holab/evaluation.hpp"
#include "holab/radio.hpp"
#include "holab/search.hpp"
#include "holab/training.hpp"

namespace fs = std::filesystem;

namespace holab {

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
  std::vector<std::string> set;  // extra key=value overrides
};

void add_common(CLI::App* app, Common& c, const std::string& default_out) {
  c.out = default_out;
  app->add_option("--seed", c.seed, "Seed (meaning depends on the command)");
  app->add_option("--out", c.out, "Output path")->capture_default_str();
  app->add_option("--config", c.config, "key = value configuration file");
  app->add_option("--set", c.set, "Override one config key, as key=value");
}

AppConfig resolve_config(const Common& c) {
  AppConfig cfg = c.config.empty() ? AppConfig{} : load_config(c.config);
  for (const auto& kv : c.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.scenario.validate();
  cfg.train.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Normalizer fitted on every run of a training dataset file.
std::pair<Dataset, ModelContext> load_training_data(const std::string& path, const AppConfig& cfg) {
  const Dataset raw = load_dataset(path);
  if (raw.empty()) throw DataError("dataset " + path + " is empty");
  ModelContext ctx;
  const std::vector<int> runs = run_ids(raw);
  ctx.normalization = fit_normalizer(raw, runs);
  ctx.horizon = cfg.scenario.sim_duration;
  return {normalize(raw, ctx.normalization), ctx};
}

void maybe_write_curve(const LossCurve& curve, const std::string& path) {
  if (!path.empty()) write_loss_curve(curve, path);
}

std::vector<Predictor> load_predictors(const std::string& lstm_path, const std::string& ae_path,
                                       const std::string& mlp_path, NormalizationSpec& spec) {
  const auto lstm = load_model<LstmRegressor>(lstm_path);
  const auto ae = load_model<SeqAutoencoder>(ae_path);
  const auto mlp = load_model<MlpRegressor>(mlp_path);
  if (lstm.context.normalization != ae.context.normalization) {
    throw DataError("LSTM and autoencoder checkpoints were trained with different normalization");
  }
  spec = lstm.context.normalization;
  return {make_predictor(lstm), make_predictor(ae, mlp)};
}

void emit_report(const EvalReport& rep, const std::string& out_dir) {
  write_eval_text(rep, std::cout);
  fs::create_directories(out_dir);
  {
    auto f = open_out(fs::path(out_dir) / "report.txt");
    write_eval_text(rep, f);
  }
  {
    auto f = open_out(fs::path(out_dir) / "report.csv");
    write_eval_csv(rep, f);
  }
  for (std::size_t i = 0; i < rep.learned.size(); ++i) {
    if (rep.differences[i].empty()) continue;
    auto f = open_out(fs::path(out_dir) / ("ecdf_" + rep.learned[i].name + ".csv"));
    write_ecdf_csv(ecdf(rep.differences[i]), f);
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Handover download-time prediction toolkit"};
  app.require_subcommand(1);

  // scenario rem
  auto* scenario = app.add_subcommand("scenario", "Scenario utilities");
  scenario->require_subcommand(1);
  auto* rem = scenario->add_subcommand("rem", "Write a radio environment map");
  Common rem_c;
  double rem_res = 10.0;
  add_common(rem, rem_c, "rem.txt");
  rem->add_option("--resolution", rem_res, "Pixel size in meters")->capture_default_str();

  // campaign run
  auto* campaign = app.add_subcommand("campaign", "Simulation campaigns");
  campaign->require_subcommand(1);
  auto* crun = campaign->add_subcommand("run", "Run one campaign and dump traces");
  Common crun_c;
  std::string policy = "benchmark";
  add_common(crun, crun_c, "traces.txt");
  crun->add_option("--policy", policy, "benchmark, forced-<k> or forced-all")->capture_default_str();

  // dataset build
  auto* dataset = app.add_subcommand("dataset", "Dataset generation");
  dataset->require_subcommand(1);
  auto* dbuild = dataset->add_subcommand("build", "Forced campaigns over runs 1..num_runs into a dataset");
  Common dbuild_c;
  add_common(dbuild, dbuild_c, "dataset.bin");

  // train lstm|ae|mlp
  auto* train = app.add_subcommand("train", "Train a model");
  train->require_subcommand(1);
  Common tr_c;
  std::string data_path = "dataset.bin", curve_path, ae_path = "ae.ckpt";
  auto* tl = train->add_subcommand("lstm", "LSTM regressor");
  auto* ta = train->add_subcommand("ae", "Sequence autoencoder");
  auto* tm = train->add_subcommand("mlp", "MLP on frozen codewords");
  for (auto* sub : {tl, ta, tm}) {
    add_common(sub, tr_c, "");
    sub->add_option("--dataset", data_path, "Training dataset")->capture_default_str();
    sub->add_option("--curve", curve_path, "Write the loss curve CSV here");
  }
  tm->add_option("--ae", ae_path, "Trained autoencoder checkpoint")->capture_default_str();

  // search
  auto* search = app.add_subcommand("search", "Hyperparameter search");
  Common se_c;
  std::string family = "lstm";
  add_common(search, se_c, "search.csv");
  search->add_option("--family", family, "lstm, ae or mlp")->capture_default_str();
  search->add_option("--dataset", data_path, "Training dataset")->capture_default_str();
  search->add_option("--ae", ae_path, "Autoencoder checkpoint for the mlp family")->capture_default_str();

  // eval / eval-cross
  std::string lstm_ckpt = "lstm.ckpt", ae_ckpt = "ae.ckpt", mlp_ckpt = "mlp.ckpt";
  Common ev_c;
  std::optional<std::uint64_t> alt_seed;
  auto* ev = app.add_subcommand("eval", "Evaluate learned target selection on a held-out run");
  auto* evx = app.add_subcommand("eval-cross", "Evaluate on a different obstacle layout without retraining");
  for (auto* sub : {ev, evx}) {
    add_common(sub, ev_c, "eval");
    sub->add_option("--lstm", lstm_ckpt, "LSTM checkpoint")->capture_default_str();
    sub->add_option("--ae", ae_ckpt, "Autoencoder checkpoint")->capture_default_str();
    sub->add_option("--mlp", mlp_ckpt, "MLP checkpoint")->capture_default_str();
  }
  evx->add_option("--alt-obstacle-seed", alt_seed, "Obstacle seed of the alternate layout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (rem->parsed()) {
      AppConfig cfg = resolve_config(rem_c);
      if (rem_c.seed) cfg.scenario.obstacle_seed = *rem_c.seed;
      const Scenario sc = build_scenario(cfg.scenario);
      const double r = deployment_radius(cfg.scenario);
      auto out = open_out(rem_c.out);
      write_rem(out, render_rem(sc, Bounds{-r, -r, 2 * r, 2 * r}, rem_res));
    } else if (crun->parsed()) {
      const AppConfig cfg = resolve_config(crun_c);
      const Scenario sc = build_scenario(cfg.scenario);
      const std::uint64_t seed = crun_c.seed.value_or(1);
      std::vector<TraceLog> traces;
      if (policy == "benchmark") {
        traces = run_simulation(sc, BenchmarkPolicy{}, seed);
      } else if (policy == "forced-all") {
        for (auto& per_rank : run_forced_campaign(sc, seed)) {
          traces.insert(traces.end(), per_rank.begin(), per_rank.end());
        }
      } else if (policy.rfind("forced-", 0) == 0) {
        int k = 0;
        try {
          k = std::stoi(policy.substr(7));
        } catch (const std::exception&) {
          throw UsageError("bad policy '" + policy + "'");
        }
        traces = run_simulation(sc, ForcedPolicy{k}, seed);
      } else {
        throw UsageError("unknown policy '" + policy + "' (benchmark, forced-<k>, forced-all)");
      }
      write_traces(traces, fs::path(crun_c.out));
    } else if (dbuild->parsed()) {
      AppConfig cfg = resolve_config(dbuild_c);
      if (dbuild_c.seed) cfg.scenario.obstacle_seed = *dbuild_c.seed;
      const Dataset d = build_campaign_dataset(build_scenario(cfg.scenario), cfg.scenario.num_runs);
      if (fs::path(dbuild_c.out).has_parent_path()) fs::create_directories(fs::path(dbuild_c.out).parent_path());
      save_dataset(d, dbuild_c.out);
      std::cout << d.size() << " rows of " << d.windows << "x" << kNumFeatures << " written to " << dbuild_c.out << '\n';
    } else if (tl->parsed() || ta->parsed() || tm->parsed()) {
      AppConfig cfg = resolve_config(tr_c);
      if (tr_c.seed) cfg.train.seed = *tr_c.seed;
      const auto [data, ctx] = load_training_data(data_path, cfg);
      std::string out = tr_c.out;
      if (tl->parsed()) {
        const auto t = train_lstm_regressor(data, cfg.model.lstm_hidden, cfg.train, ctx);
        if (out.empty()) out = "lstm.ckpt";
        save_model(t.model, out);
        maybe_write_curve(t.curve, curve_path);
        std::cout << "lstm: best validation MSE " << t.curve.best_val() << " at epoch " << t.curve.best_epoch + 1 << '\n';
      } else if (ta->parsed()) {
        const auto t = train_autoencoder(data, cfg.model.codeword, cfg.train, ctx);
        if (out.empty()) out = "ae.ckpt";
        save_model(t.model, out);
        maybe_write_curve(t.curve, curve_path);
        std::cout << "ae: best validation MSE " << t.curve.best_val() << " at epoch " << t.curve.best_epoch + 1 << '\n';
      } else {
        const auto ae = load_model<SeqAutoencoder>(ae_path);
        if (ae.context.normalization != ctx.normalization) {
          throw DataError("autoencoder " + ae_path + " was trained with a different normalization than " + data_path);
        }
        const auto t = train_mlp(ae, data, cfg.model.mlp_hidden, cfg.train);
        if (out.empty()) out = "mlp.ckpt";
        save_model(t.model, out);
        maybe_write_curve(t.curve, curve_path);
        std::cout << "mlp: best validation MSE " << t.curve.best_val() << " at epoch " << t.curve.best_epoch + 1 << '\n';
      }
    } else if (search->parsed()) {
      AppConfig cfg = resolve_config(se_c);
      if (se_c.seed) cfg.train.seed = *se_c.seed;
      const auto [data, ctx] = load_training_data(data_path, cfg);
      SearchReport rep;
      if (family == "lstm") {
        rep = search_lstm(data, default_lstm_grid(), cfg.train, cfg.model.selection_metric, ctx);
      } else if (family == "ae") {
        rep = search_autoencoder(data, default_codeword_grid(), cfg.train, cfg.model.selection_metric, ctx);
      } else if (family == "mlp") {
        const auto ae = load_model<SeqAutoencoder>(ae_path);
        rep = search_mlp(ae, data, default_mlp_grid(), cfg.train, cfg.model.selection_metric);
      } else {
        throw UsageError("unknown search family '" + family + "' (lstm, ae, mlp)");
      }
      auto f = open_out(se_c.out);
      write_search_report(rep, f);
      write_search_report(rep, std::cout);
    } else if (ev->parsed() || evx->parsed()) {
      const AppConfig cfg = resolve_config(ev_c);
      NormalizationSpec spec;
      const auto predictors = load_predictors(lstm_ckpt, ae_ckpt, mlp_ckpt, spec);
      const std::uint64_t run = ev_c.seed.value_or(static_cast<std::uint64_t>(cfg.eval_run_seed()));
      if (run >= 1 && run <= static_cast<std::uint64_t>(cfg.scenario.num_runs)) {
        throw UsageError("evaluation run " + std::to_string(run) + " is one of the training runs 1.." +
                         std::to_string(cfg.scenario.num_runs));
      }
      const EvalReport rep =
          ev->parsed() ? evaluate(build_scenario(cfg.scenario), predictors, spec, run)
                       : cross_scenario_eval(cfg.scenario, alt_seed.value_or(cfg.model.alt_obstacle_seed), predictors,
                                             spec, run);
      emit_report(rep, ev_c.out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace holab
