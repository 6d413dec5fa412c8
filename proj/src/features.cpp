#include "holab/features.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace holab {

namespace {

struct Inputs {
  const StackCounters& c;
  const MeasurementReport& report;
  const RadioSample* serving_radio;
};

struct Rule {
  int index;  // 1-based feature number
  std::string name;
  std::function<double(const Inputs&)> get;
};

void add_layer(std::vector<Rule>& rules, int& next, const std::string& prefix, bool rlc,
               const LayerStats DirectionCounters::*layer, const DirectionCounters StackCounters::*dir) {
  auto field = [&](const std::string& name, double LayerStats::*member) {
    rules.push_back({next++, prefix + name, [=](const Inputs& in) { return (in.c.*dir.*layer).*member; }});
  };
  field("_tx_pdus", &LayerStats::tx_pdus);
  field("_rx_pdus", &LayerStats::rx_pdus);
  field("_tx_bytes", &LayerStats::tx_bytes);
  if (rlc) field("_rx_bytes", &LayerStats::rx_bytes);
  field("_delay_avg", &LayerStats::delay_avg);
  field("_delay_min", &LayerStats::delay_min);
  field("_delay_max", &LayerStats::delay_max);
  field("_size_min", &LayerStats::size_min);
  field("_size_max", &LayerStats::size_max);
}

std::vector<Rule> make_rules() {
  std::vector<Rule> r;
  using D = DirectionCounters;
  auto dl = [](auto member) { return [=](const Inputs& in) { return in.c.dl.*member; }; };
  auto ul = [](auto member) { return [=](const Inputs& in) { return in.c.ul.*member; }; };

  r.push_back({1, "ul_throughput", ul(&D::app_throughput)});
  r.push_back({2, "ul_rx_packets", ul(&D::app_packets)});
  r.push_back({3, "ul_rx_bytes", ul(&D::app_bytes)});
  r.push_back({4, "dl_throughput", dl(&D::app_throughput)});
  r.push_back({5, "dl_rx_packets", dl(&D::app_packets)});
  r.push_back({6, "dl_rx_bytes", dl(&D::app_bytes)});

  r.push_back({7, "cellid_serving", [](const Inputs& in) { return double(in.report.serving.cell_id); }});
  r.push_back({8, "rsrp_serving", [](const Inputs& in) { return in.report.serving.rsrp; }});
  r.push_back({9, "rsrq_serving", [](const Inputs& in) { return in.report.serving.rsrq; }});
  for (int n = 0; n < kReportedNeighbors; ++n) {
    const std::string tag = "_neighbor" + std::to_string(n + 1);
    const int base = 10 + 3 * n;
    r.push_back({base, "cellid" + tag, [n](const Inputs& in) { return double(in.report.neighbors.at(n).cell_id); }});
    r.push_back({base + 1, "rsrp" + tag, [n](const Inputs& in) { return in.report.neighbors.at(n).rsrp; }});
    r.push_back({base + 2, "rsrq" + tag, [n](const Inputs& in) { return in.report.neighbors.at(n).rsrq; }});
  }
  r.push_back({34, "rlf_total", [](const Inputs& in) { return in.c.rlf_total; }});
  r.push_back({35, "handover_total", [](const Inputs& in) { return in.c.handover_total; }});
  r.push_back({36, "first_target_cellid", [](const Inputs& in) { return in.c.first_target_cell; }});

  int next = 37;
  add_layer(r, next, "pdcp_dl", false, &D::pdcp, &StackCounters::dl);
  add_layer(r, next, "pdcp_ul", false, &D::pdcp, &StackCounters::ul);
  add_layer(r, next, "rlc_dl", true, &D::rlc, &StackCounters::dl);
  add_layer(r, next, "rlc_ul", true, &D::rlc, &StackCounters::ul);

  r.push_back({71, "mac_initial_mcs", [](const Inputs& in) { return in.c.initial_mcs; }});
  r.push_back({72, "mac_ul_tb_size", ul(&D::tb_size)});
  r.push_back({73, "mac_dl_tb_size", dl(&D::tb_size)});
  r.push_back({74, "mac_ul_mcs", ul(&D::mcs)});
  r.push_back({75, "mac_dl_mcs", dl(&D::mcs)});
  r.push_back({76, "mac_ul_rb_occupied", ul(&D::rb_occupied)});
  r.push_back({77, "mac_dl_rb_occupied", dl(&D::rb_occupied)});
  r.push_back({78, "dl_cqi_inband", [](const Inputs& in) { return in.c.dl_cqi_inband; }});
  r.push_back({79, "dl_cqi_wideband", dl(&D::cqi)});
  r.push_back({80, "ul_cqi", ul(&D::cqi)});
  r.push_back({81, "phy_dl_sinr", [](const Inputs& in) { return in.serving_radio ? in.serving_radio->sinr : 0.0; }});
  r.push_back({82, "phy_ul_sinr", [](const Inputs& in) { return in.serving_radio ? in.serving_radio->ul_sinr : 0.0; }});
  r.push_back({83, "phy_dl_harq_nacks", dl(&D::harq_nacks)});
  r.push_back({84, "phy_ul_harq_nacks", ul(&D::harq_nacks)});
  return r;
}

const std::vector<Rule>& rules() {
  static const std::vector<Rule> table = [] {
    auto t = make_rules();
    std::array<int, kNumFeatures> seen{};
    for (const Rule& rule : t) {
      if (rule.index < 1 || rule.index > kNumFeatures) throw std::logic_error("feature rule out of range");
      ++seen[rule.index - 1];
    }
    for (int n : seen) {
      if (n != 1) throw std::logic_error("feature catalogue must write every slot exactly once");
    }
    return t;
  }();
  return table;
}

const std::array<std::string, kNumFeatures>& names() {
  static const std::array<std::string, kNumFeatures> table = [] {
    std::array<std::string, kNumFeatures> t;
    for (const Rule& rule : rules()) {
      const std::string num = (rule.index < 10 ? "0" : "") + std::to_string(rule.index);
      t[rule.index - 1] = "f" + num + "_" + rule.name;
    }
    return t;
  }();
  return table;
}

}  // namespace

std::string_view feature_name(int index) {
  if (index < 1 || index > kNumFeatures) throw std::out_of_range("feature index out of range");
  return names()[index - 1];
}

bool is_cell_id_feature(int index) {
  return (index >= 7 && index <= 31 && (index - 7) % 3 == 0) || index == 36;
}

FeatureVector extract_features(const StackCounters& counters, const MeasurementReport& report,
                               std::span<const RadioSample> radio) {
  const RadioSample* serving = nullptr;
  for (const RadioSample& s : radio) {
    if (s.cell_id == report.serving.cell_id) serving = &s;
  }
  const Inputs in{counters, report, serving};
  FeatureVector f{};
  for (const Rule& rule : rules()) f[rule.index - 1] = rule.get(in);
  return f;
}

std::array<int, kNumFeatures> feature_coverage() {
  std::array<int, kNumFeatures> seen{};
  for (const Rule& rule : rules()) ++seen[rule.index - 1];
  return seen;
}

}  // namespace holab
