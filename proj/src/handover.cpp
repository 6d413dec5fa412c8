#include "holab/handover.hpp"

#include <algorithm>
#include <stdexcept>

#include "holab/error.hpp"

namespace holab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t serving_index(std::span<const RadioSample> radio, int cell_id) {
  for (std::size_t i = 0; i < radio.size(); ++i) {
    if (radio[i].cell_id == cell_id) return i;
  }
  throw std::out_of_range("serving cell missing from radio samples");
}

double report_sinr(std::span<const RadioSample> radio, int cell_id) {
  return radio[serving_index(radio, cell_id)].sinr;
}

bool a2_condition(const MeasurementReport& report, double threshold, int& streak) {
  streak = report.serving.rsrp < threshold ? streak + 1 : 0;
  return streak >= kA2TimeToTrigger;
}

}  // namespace

std::string policy_name(const HandoverPolicy& policy) {
  return std::visit(Overloaded{
                        [](const BenchmarkPolicy&) { return std::string("benchmark"); },
                        [](const ForcedPolicy& p) { return "forced-" + std::to_string(p.rank); },
                        [](const LearnedPolicy&) { return std::string("learned"); },
                    },
                    policy);
}

void validate_policy(const HandoverPolicy& policy, int max_neighbors) {
  const int limit = std::min(max_neighbors, kReportedNeighbors);
  auto check = [&](int k) {
    if (k < 1 || k > limit) {
      throw UsageError("neighbor rank " + std::to_string(k) + " outside 1.." + std::to_string(limit));
    }
  };
  if (const auto* f = std::get_if<ForcedPolicy>(&policy)) check(f->rank);
  if (const auto* l = std::get_if<LearnedPolicy>(&policy)) {
    for (int k : l->rank_per_ue) check(k);
  }
}

std::optional<int> a2_rsrp_decide(const MeasurementReport& report, double a2_threshold, int& streak) {
  if (!a2_condition(report, a2_threshold, streak)) return std::nullopt;
  const CellMeasurement* best = report.real_neighbor(1);
  if (best == nullptr) return std::nullopt;
  return best->cell_id;
}

std::optional<int> forced_decide(const MeasurementReport& report, int rank, double a2_threshold,
                                 int& streak, bool& already_fired) {
  if (already_fired) return std::nullopt;
  if (!a2_condition(report, a2_threshold, streak)) return std::nullopt;
  const CellMeasurement* pick = report.real_neighbor(rank);
  if (pick == nullptr) pick = report.real_neighbor(1);
  if (pick == nullptr) return std::nullopt;
  already_fired = true;
  return pick->cell_id;
}

UEState execute_handover(const UEState& ue, int target_cell) {
  if (target_cell == kSentinelCellId) throw std::invalid_argument("handover target must be a real cell");
  UEState next = ue;
  next.serving_cell = target_cell;
  next.interrupted = true;
  next.handover_count += 1;
  if (next.first_target_cell == 0) next.first_target_cell = target_cell;
  next.a2_streak = 0;
  next.initial_mcs_pending = true;
  reset_ramp(next);
  return next;
}

RlfEvent rlf_check(UEState& ue, double sinr_db) {
  if (!ue.connected) return RlfEvent::None;
  ue.low_sinr_streak = sinr_db < kRlfSinrThreshold ? ue.low_sinr_streak + 1 : 0;
  if (ue.low_sinr_streak < kRlfWindows) return RlfEvent::None;
  ue.connected = false;
  ue.rlf_count += 1;
  ue.low_sinr_streak = 0;
  ue.a2_streak = 0;
  ue.reestablish_countdown = kReestablishWindows;
  reset_ramp(ue);
  return RlfEvent::Declared;
}

void reestablish_if_due(UEState& ue, std::span<const RadioSample> radio) {
  if (ue.connected || ue.reestablish_countdown > 0) return;
  ue.connected = true;
  ue.serving_cell = radio[best_rsrp_index(radio)].cell_id;
  ue.initial_mcs_pending = true;
  reset_ramp(ue);
}

std::vector<TraceLog> run_simulation(const Scenario& scenario, const HandoverPolicy& policy,
                                     std::uint64_t run_seed) {
  const ScenarioConfig& cfg = scenario.config;
  validate_policy(policy, cfg.max_neighbors);
  const int windows = cfg.num_windows();
  const double dt = cfg.sample_period;
  const double horizon = cfg.sim_duration;

  std::vector<UEState> ues = init_ues(scenario, run_seed);
  if (const auto* l = std::get_if<LearnedPolicy>(&policy)) {
    if (l->rank_per_ue.size() != ues.size()) throw UsageError("learned policy must give one rank per UE");
  }

  std::vector<TraceLog> logs(ues.size());
  const std::string name = policy_name(policy);
  for (std::size_t u = 0; u < ues.size(); ++u) {
    logs[u].run_id = static_cast<int>(run_seed);
    logs[u].ue_id = ues[u].ue_id;
    logs[u].policy = name;
    if (const auto* f = std::get_if<ForcedPolicy>(&policy)) logs[u].rank = f->rank;
    if (const auto* l = std::get_if<LearnedPolicy>(&policy)) logs[u].rank = l->rank_per_ue[u];
    logs[u].windows.reserve(windows);
  }

  for (int w = 0; w < windows; ++w) {
    const double t_start = w * dt;
    for (std::size_t u = 0; u < ues.size(); ++u) {
      UEState& ue = ues[u];
      const auto radio = compute_radio(scenario, ue.position);
      reestablish_if_due(ue, radio);

      const MeasurementReport report = build_report(radio, ue.serving_cell, cfg.max_neighbors);
      if (ue.connected && rlf_check(ue, report_sinr(radio, ue.serving_cell)) == RlfEvent::None) {
        std::optional<int> target;
        std::visit(Overloaded{
                       [&](const BenchmarkPolicy& p) {
                         target = a2_rsrp_decide(report, p.a2_threshold.value_or(cfg.a2_threshold), ue.a2_streak);
                       },
                       [&](const ForcedPolicy& p) {
                         target = forced_decide(report, p.rank, cfg.a2_threshold, ue.a2_streak, ue.forced_fired);
                       },
                       [&](const LearnedPolicy& p) {
                         target = forced_decide(report, p.rank_per_ue[u], cfg.a2_threshold, ue.a2_streak,
                                                ue.forced_fired);
                       },
                   },
                   policy);
        if (target) ue = execute_handover(ue, *target);
      }

      const RadioSample& serving = radio[serving_index(radio, ue.serving_cell)];
      const StackCounters counters = step_flow(ue, serving, dt, t_start, cfg);
      logs[u].windows.push_back(extract_features(counters, report, radio));

      if (!ue.connected) ue.reestablish_countdown = std::max(0, ue.reestablish_countdown - 1);
      ue = step_mobility(ue, dt, cfg.ue_speed);
    }
  }

  for (std::size_t u = 0; u < ues.size(); ++u) {
    const UEState& ue = ues[u];
    logs[u].download_time = ue.download_complete_time ? std::min(*ue.download_complete_time, horizon) : horizon;
    logs[u].target_cell = ue.first_target_cell;
    logs[u].handovers = ue.handover_count;
    logs[u].rlfs = ue.rlf_count;
  }
  return logs;
}

}  // namespace holab
