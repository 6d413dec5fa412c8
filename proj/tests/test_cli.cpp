#include <doctest.h>

#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "holab/config_file.hpp"
#include "holab/dataset.hpp"
#include "holab/error.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "holab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return holab::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path tiny_config_file(const fs::path& dir) {
  const fs::path p = dir / "tiny.cfg";
  std::ofstream(p) << "# one site, short runs\n"
                      "num_sites = 1\nues_per_sector = 1\nnum_runs = 2\nsim_duration = 2\nnum_obstacles = 2\n"
                      "epochs = 2\nbatch_size = 8\nlstm_hidden = 4\ncodeword = 3\nmlp_hidden = 4\n";
  return p;
}

}  // namespace

TEST_SUITE("eval-cli") {

TEST_CASE("config file parsing") {
  holab::AppConfig c;
  std::istringstream in("# comment\nues_per_sector = 2\n\nlstm_hidden = 84,62\nlr=0.01\n");
  holab::apply_config(c, in);
  CHECK(c.scenario.ues_per_sector == 2);
  CHECK(c.model.lstm_hidden == std::vector<int>{84, 62});
  CHECK(c.train.lr == 0.01);
  CHECK_THROWS_AS(holab::apply_setting(c, "bogus", "1"), holab::UsageError);
  CHECK_THROWS_AS(holab::apply_setting(c, "num_runs", "x"), holab::UsageError);
  CHECK(holab::parse_int_list("3,2,1") == std::vector<int>{3, 2, 1});
}

TEST_CASE("end-to-end pipeline on a tiny scenario") {
  const fs::path dir = test::temp_dir("cli");
  const std::string cfg = tiny_config_file(dir).string();
  const std::string d = dir.string();

  REQUIRE(cli({"campaign", "run", "--config", cfg, "--seed", "1", "--out", d + "/a.txt"}) == 0);
  REQUIRE(cli({"campaign", "run", "--config", cfg, "--seed", "1", "--out", d + "/b.txt"}) == 0);
  CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
  CHECK(cli({"campaign", "run", "--config", cfg, "--policy", "forced-all", "--out", d + "/f.txt"}) == 0);

  REQUIRE(cli({"dataset", "build", "--config", cfg, "--out", d + "/ds.bin"}) == 0);
  CHECK(holab::load_dataset(dir / "ds.bin").size() == 48);

  REQUIRE(cli({"train", "lstm", "--config", cfg, "--dataset", d + "/ds.bin", "--out", d + "/lstm.ckpt", "--curve",
               d + "/lstm_curve.csv"}) == 0);
  REQUIRE(cli({"train", "ae", "--config", cfg, "--dataset", d + "/ds.bin", "--out", d + "/ae.ckpt"}) == 0);
  REQUIRE(cli({"train", "mlp", "--config", cfg, "--dataset", d + "/ds.bin", "--ae", d + "/ae.ckpt", "--out",
               d + "/mlp.ckpt"}) == 0);
  CHECK(slurp(dir / "lstm_curve.csv").rfind("epoch,train_mse,val_mse\n1,", 0) == 0);

  const std::vector<std::string> models{"--lstm", d + "/lstm.ckpt", "--ae", d + "/ae.ckpt", "--mlp", d + "/mlp.ckpt"};
  auto with_models = [&](std::vector<std::string> args) {
    args.insert(args.end(), models.begin(), models.end());
    return args;
  };
  REQUIRE(cli(with_models({"eval", "--config", cfg, "--out", d + "/eval"})) == 0);
  CHECK(fs::exists(dir / "eval" / "report.txt"));
  CHECK(slurp(dir / "eval" / "report.csv").rfind("ue_id,benchmark_time,oracle_rank,oracle_time,lstm_rank", 0) == 0);
  CHECK(cli(with_models({"eval-cross", "--config", cfg, "--alt-obstacle-seed", "5", "--out", d + "/x"})) == 0);
  CHECK(slurp(dir / "x" / "report.txt").find("obstacle seed 5") != std::string::npos);

  // Training runs may not be reused for evaluation.
  CHECK(cli(with_models({"eval", "--config", cfg, "--seed", "2", "--out", d + "/bad"})) == 1);

  REQUIRE(cli({"search", "--config", cfg, "--family", "ae", "--dataset", d + "/ds.bin", "--out", d + "/s.csv"}) == 0);
  CHECK(slurp(dir / "s.csv").rfind("rank,candidate", 0) == 0);
}

TEST_CASE("exit codes separate usage errors from data errors") {
  const fs::path dir = test::temp_dir("cli_err");
  const std::string d = dir.string();
  CHECK(cli({}) == 1);
  CHECK(cli({"--help"}) == 0);
  CHECK(cli({"campaign", "run", "--policy", "forced-9", "--out", d + "/t.txt"}) == 1);
  CHECK(cli({"campaign", "run", "--policy", "sideways", "--out", d + "/t.txt"}) == 1);
  CHECK(cli({"campaign", "run", "--set", "no_such_key=1", "--out", d + "/t.txt"}) == 1);
  CHECK(cli({"campaign", "run", "--set", "sample_period=0.3", "--out", d + "/t.txt"}) == 1);
  CHECK(cli({"search", "--family", "rnn", "--dataset", d + "/missing.bin"}) == 2);
  CHECK(cli({"train", "lstm", "--dataset", d + "/missing.bin"}) == 2);

  std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
  CHECK(cli({"eval", "--lstm", d + "/junk.ckpt", "--ae", d + "/junk.ckpt", "--mlp", d + "/junk.ckpt"}) == 2);
}

}
