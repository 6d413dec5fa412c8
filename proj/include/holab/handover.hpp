#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "holab/features.hpp"
#include "holab/measurement.hpp"
#include "holab/scenario.hpp"
#include "holab/traffic.hpp"

namespace holab {

inline constexpr int kA2TimeToTrigger = 2;      // consecutive reports
inline constexpr double kRlfSinrThreshold = -6.0;  // dB
inline constexpr int kRlfWindows = 5;
inline constexpr int kReestablishWindows = 2;

/// A2-RSRP: hand over to the strongest neighbor once the serving cell has
/// been below the threshold for the time-to-trigger.
/// Without an explicit threshold the scenario's a2_threshold applies.
struct BenchmarkPolicy {
  std::optional<double> a2_threshold;
};

/// Dataset campaigns: at the first A2 firing, hand over to the k-th
/// strongest neighbor, then never again.
struct ForcedPolicy {
  int rank = 1;
};

/// Offline-learned selection: per-UE neighbor rank (indexed by ue_id),
/// applied at the first A2 firing like a forced campaign.
struct LearnedPolicy {
  std::vector<int> rank_per_ue;
};

using HandoverPolicy = std::variant<BenchmarkPolicy, ForcedPolicy, LearnedPolicy>;

std::string policy_name(const HandoverPolicy& policy);

/// Checks the policy against the configured neighbor limit.
void validate_policy(const HandoverPolicy& policy, int max_neighbors);

/// Advances the A2 time-to-trigger streak with `report`. Returns the
/// strongest real neighbor when the condition has held for two consecutive
/// reports, otherwise nothing.
std::optional<int> a2_rsrp_decide(const MeasurementReport& report, double a2_threshold, int& streak);

/// Same trigger as the benchmark, but picks the k-th real neighbor (falling
/// back to the strongest) and only ever fires once.
std::optional<int> forced_decide(const MeasurementReport& report, int rank, double a2_threshold,
                                 int& streak, bool& already_fired);

UEState execute_handover(const UEState& ue, int target_cell);

enum class RlfEvent { None, Declared };

/// Counts consecutive low-SINR windows and drops the connection on the
/// fifth. Re-establishment happens in `reestablish_if_due`.
RlfEvent rlf_check(UEState& ue, double sinr_db);

/// Reconnects a dropped UE to the strongest cell once its countdown ends.
void reestablish_if_due(UEState& ue, std::span<const RadioSample> radio);

struct TraceLog {
  int run_id = 0;
  int ue_id = 0;
  std::string policy;
  int rank = 0;         // neighbor rank for forced campaigns, 0 otherwise
  int target_cell = 0;  // first handover target, 0 if none
  double download_time = 0.0;  // s, clipped at the run horizon
  std::vector<FeatureVector> windows;
  int handovers = 0;
  int rlfs = 0;
};

/// Steps every UE over all sampling windows of one run.
std::vector<TraceLog> run_simulation(const Scenario& scenario, const HandoverPolicy& policy,
                                     std::uint64_t run_seed);

}  // namespace holab
