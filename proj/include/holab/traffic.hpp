#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "holab/radio.hpp"
#include "holab/scenario.hpp"

namespace holab {

inline constexpr double kPduSize = 1500.0;  // bytes
inline constexpr double kInitialRamp = 1.0 / 64.0;

struct UEState {
  int ue_id = 0;
  Vec2 position;
  double heading = 0.0;  // deg
  bool moving = false;
  int serving_cell = 0;
  double dl_bytes_remaining = 0.0;
  double ul_bytes_remaining = 0.0;
  double ramp_factor = kInitialRamp;
  bool connected = true;
  std::optional<double> download_complete_time;

  // Radio-link and mobility bookkeeping.
  bool interrupted = false;  // current window is lost to a handover
  int a2_streak = 0;
  int low_sinr_streak = 0;
  int reestablish_countdown = 0;
  bool forced_fired = false;
  int handover_count = 0;
  int rlf_count = 0;
  int first_target_cell = 0;
  bool initial_mcs_pending = true;
  int initial_mcs = 0;
};

/// Per-layer PDU statistics for one direction and one window.
struct LayerStats {
  double tx_pdus = 0;
  double rx_pdus = 0;
  double tx_bytes = 0;
  double rx_bytes = 0;
  double delay_min = 0;  // ms
  double delay_avg = 0;
  double delay_max = 0;
  double size_min = 0;  // bytes
  double size_max = 0;
};

struct DirectionCounters {
  double app_packets = 0;
  double app_bytes = 0;
  double app_throughput = 0;  // bytes/s over the window
  LayerStats pdcp;
  LayerStats rlc;
  double mcs = 0;
  double tb_size = 0;  // bits per scheduled TTI
  double rb_occupied = 0;
  double cqi = 0;
  double sinr = 0;  // dB
  double harq_nacks = 0;
};

/// Everything the protocol stack reports for one sampling window.
struct StackCounters {
  DirectionCounters dl;
  DirectionCounters ul;
  double dl_cqi_inband = 0;
  double initial_mcs = 0;
  // Running totals at the end of the window.
  double rlf_total = 0;
  double handover_total = 0;
  double first_target_cell = 0;
};

struct LinkAdaptation {
  int cqi = 0;
  int mcs = 0;
  double spectral_eff = 0.0;  // bits/symbol
  double tb_bits_per_ms = 0.0;
};

/// CQI/MCS/throughput for a wideband SINR on `n_prb` resource blocks.
LinkAdaptation link_adaptation(double sinr_db, int n_prb);

/// Places `ues_per_sector` UEs uniformly in each sector's cluster disc.
std::vector<UEState> init_ues(const Scenario& scenario, std::uint64_t run_seed);

UEState step_mobility(const UEState& ue, double dt, double speed);

/// Advances both bulk transfers by one window starting at `t_start`.
/// `serving` must be the serving cell's sample at the UE's position.
StackCounters step_flow(UEState& ue, const RadioSample& serving, double dt, double t_start,
                        const ScenarioConfig& config);

/// Restarts the transfer ramp after a handover or re-establishment.
void reset_ramp(UEState& ue);

}  // namespace holab
