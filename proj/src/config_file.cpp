#include "holab/config_file.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "holab/error.hpp"

namespace holab {

namespace {

using Setter = std::function<void(AppConfig&, const std::string&)>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw UsageError("bad value '" + text + "' for key '" + key + "'");
  return v;
}

template <class T, class Owner>
Setter field(Owner AppConfig::*part, T Owner::*member) {
  return [part, member](AppConfig& c, const std::string& v) {
    (c.*part).*member = parse_number<T>("", v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto sc = &AppConfig::scenario;
    t["inter_site_distance"] = field(sc, &ScenarioConfig::inter_site_distance);
    t["num_sites"] = field(sc, &ScenarioConfig::num_sites);
    t["bandwidth_prb"] = field(sc, &ScenarioConfig::bandwidth_prb);
    t["enb_tx_power"] = field(sc, &ScenarioConfig::enb_tx_power);
    t["ue_tx_power"] = field(sc, &ScenarioConfig::ue_tx_power);
    t["enb_height"] = field(sc, &ScenarioConfig::enb_height);
    t["ue_height"] = field(sc, &ScenarioConfig::ue_height);
    t["carrier_freq"] = field(sc, &ScenarioConfig::carrier_freq);
    t["antenna_beamwidth"] = field(sc, &ScenarioConfig::antenna_beamwidth);
    t["antenna_max_atten"] = field(sc, &ScenarioConfig::antenna_max_atten);
    t["obstacle_height"] = field(sc, &ScenarioConfig::obstacle_height);
    t["obstacle_loss"] = field(sc, &ScenarioConfig::obstacle_loss);
    t["num_obstacles"] = field(sc, &ScenarioConfig::num_obstacles);
    t["cluster_distance"] = field(sc, &ScenarioConfig::cluster_distance);
    t["cluster_diameter"] = field(sc, &ScenarioConfig::cluster_diameter);
    t["ues_per_sector"] = field(sc, &ScenarioConfig::ues_per_sector);
    t["ue_speed"] = field(sc, &ScenarioConfig::ue_speed);
    t["sim_duration"] = field(sc, &ScenarioConfig::sim_duration);
    t["sample_period"] = field(sc, &ScenarioConfig::sample_period);
    t["file_size"] = field(sc, &ScenarioConfig::file_size);
    t["max_neighbors"] = field(sc, &ScenarioConfig::max_neighbors);
    t["num_runs"] = field(sc, &ScenarioConfig::num_runs);
    t["noise_figure"] = field(sc, &ScenarioConfig::noise_figure);
    t["a2_threshold"] = field(sc, &ScenarioConfig::a2_threshold);
    t["obstacle_seed"] = field(sc, &ScenarioConfig::obstacle_seed);

    auto tr = &AppConfig::train;
    t["batch_size"] = field(tr, &TrainConfig::batch_size);
    t["epochs"] = field(tr, &TrainConfig::epochs);
    t["lr"] = field(tr, &TrainConfig::lr);
    t["validation_fraction"] = field(tr, &TrainConfig::validation_fraction);
    t["seed"] = field(tr, &TrainConfig::seed);

    auto md = &AppConfig::model;
    t["lstm_hidden"] = [](AppConfig& c, const std::string& v) { c.model.lstm_hidden = parse_int_list(v); };
    t["codeword"] = field(md, &ModelConfig::codeword);
    t["mlp_hidden"] = [](AppConfig& c, const std::string& v) { c.model.mlp_hidden = parse_int_list(v); };
    t["eval_run"] = field(md, &ModelConfig::eval_run);
    t["alt_obstacle_seed"] = field(md, &ModelConfig::alt_obstacle_seed);
    t["selection_metric"] = [](AppConfig& c, const std::string& v) {
      c.model.selection_metric = parse_selection_metric(v);
    };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<int>("list", item));
  }
  if (out.empty()) throw UsageError("empty list '" + text + "'");
  for (int v : out) {
    if (v < 1) throw UsageError("layer sizes must be >= 1 in '" + text + "'");
  }
  return out;
}

void apply_setting(AppConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) {
    std::string valid;
    for (const auto& k : config_keys()) valid += (valid.empty() ? "" : ", ") + k;
    throw UsageError("unknown config key '" + key + "'; valid keys: " + valid);
  }
  try {
    it->second(config, value);
  } catch (const UsageError& e) {
    throw UsageError("key '" + key + "': " + e.what());
  }
}

void apply_config(AppConfig& config, std::istream& in, const std::string& source) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  AppConfig c;
  apply_config(c, in, path.string());
  return c;
}

}  // namespace holab
