#include "holab/traffic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "holab/rng.hpp"

namespace holab {

namespace {

// CQI 1..15 switching points, -6.7 dB to 19.8 dB in equal steps.
constexpr double kCqiFirstThreshold = -6.7;
constexpr double kCqiLastThreshold = 19.8;

constexpr std::array<double, 16> kCqiEfficiency = {
    0.0,    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766,
    1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547};

constexpr std::array<int, 16> kCqiToMcs = {0, 0, 0, 2, 4, 6, 8, 11, 13, 15, 18, 20, 22, 24, 26, 28};

constexpr double kSymbolsPerPrbPerMs = 12.0 * 14.0;
constexpr double kDataShare = 0.75;  // 25% control and reference-signal overhead
constexpr double kBaseDelayMs = 1.0;
constexpr double kRlcHeaderBytes = 2.0;
constexpr double kHarqNackShare = 0.1;

struct Transfer {
  double delivered = 0.0;  // bytes
  double capacity = 0.0;   // bytes per window at full ramp
  double window_fraction = 0.0;  // share of the window needed to deliver
};

Transfer transfer(double remaining, const LinkAdaptation& la, double dt, double ramp) {
  Transfer t;
  t.capacity = la.tb_bits_per_ms * 1000.0 * dt / 8.0;
  const double offered = t.capacity * ramp;
  if (remaining <= 0.0 || offered <= 0.0) return t;
  t.delivered = std::min(offered, remaining);
  t.window_fraction = t.delivered / offered;
  return t;
}

LayerStats layer_stats(double bytes, double capacity_bytes_per_s, double header_bytes, double delay_offset_ms) {
  LayerStats s;
  if (bytes <= 0.0) return s;
  const double pdus = std::ceil(bytes / kPduSize);
  s.tx_pdus = pdus;
  s.rx_pdus = pdus;
  s.tx_bytes = bytes + header_bytes * pdus;
  s.rx_bytes = s.tx_bytes;
  const double first = std::min(bytes, kPduSize);
  const double mid = 0.5 * (first + bytes);
  const double ms_per_byte = 1000.0 / capacity_bytes_per_s;
  s.delay_min = kBaseDelayMs + delay_offset_ms + first * ms_per_byte;
  s.delay_avg = kBaseDelayMs + delay_offset_ms + mid * ms_per_byte;
  s.delay_max = kBaseDelayMs + delay_offset_ms + bytes * ms_per_byte;
  const double tail = std::fmod(bytes, kPduSize);
  s.size_max = std::min(bytes, kPduSize) + header_bytes;
  s.size_min = (bytes < kPduSize ? bytes : (tail > 0.0 ? tail : kPduSize)) + header_bytes;
  return s;
}

void fill_direction(DirectionCounters& d, const LinkAdaptation& la, const Transfer& t, double sinr_db,
                    double dt, int n_prb, bool pending) {
  d.sinr = sinr_db;
  d.cqi = la.cqi;
  d.mcs = la.mcs;
  const double ttis = dt * 1000.0;
  if (pending) d.harq_nacks = la.cqi == 0 ? ttis : kHarqNackShare * ttis * t.window_fraction;
  if (t.delivered <= 0.0) return;
  d.app_bytes = t.delivered;
  d.app_packets = std::ceil(t.delivered / kPduSize);
  d.app_throughput = t.delivered / dt;
  const double rate = t.capacity / dt;
  d.pdcp = layer_stats(t.delivered, rate, 0.0, 0.0);
  d.rlc = layer_stats(t.delivered, rate, kRlcHeaderBytes, -0.5);
  d.tb_size = la.tb_bits_per_ms;
  d.rb_occupied = n_prb * (t.delivered / t.capacity);
}

}  // namespace

LinkAdaptation link_adaptation(double sinr_db, int n_prb) {
  constexpr double step = (kCqiLastThreshold - kCqiFirstThreshold) / 14.0;
  LinkAdaptation la;
  for (int cqi = 15; cqi >= 1; --cqi) {
    if (sinr_db >= kCqiFirstThreshold + step * (cqi - 1)) {
      la.cqi = cqi;
      break;
    }
  }
  la.mcs = kCqiToMcs[la.cqi];
  la.spectral_eff = kCqiEfficiency[la.cqi];
  la.tb_bits_per_ms = n_prb * kSymbolsPerPrbPerMs * la.spectral_eff * kDataShare;
  return la;
}

std::vector<UEState> init_ues(const Scenario& scenario, std::uint64_t run_seed) {
  const ScenarioConfig& cfg = scenario.config;
  Rng rng(run_seed, 0x0e5eed);
  std::vector<UEState> ues;
  ues.reserve(scenario.cells.size() * cfg.ues_per_sector);
  const double radius = cfg.cluster_diameter / 2.0;
  for (const Vec2& center : scenario.cluster_centers) {
    for (int k = 0; k < cfg.ues_per_sector; ++k) {
      UEState ue;
      ue.ue_id = static_cast<int>(ues.size());
      const double r = radius * std::sqrt(rng.uniform());
      const double phi = rng.uniform(0.0, 360.0);
      ue.position = center + r * heading_vector(phi);
      ue.heading = rng.uniform(0.0, 360.0);
      ue.dl_bytes_remaining = cfg.file_size;
      ue.ul_bytes_remaining = cfg.file_size;
      const auto radio = compute_radio(scenario, ue.position);
      ue.serving_cell = radio[best_rsrp_index(radio)].cell_id;
      ues.push_back(ue);
    }
  }
  return ues;
}

UEState step_mobility(const UEState& ue, double dt, double speed) {
  UEState next = ue;
  if (ue.moving) next.position = ue.position + (speed * dt) * heading_vector(ue.heading);
  return next;
}

void reset_ramp(UEState& ue) { ue.ramp_factor = kInitialRamp; }

StackCounters step_flow(UEState& ue, const RadioSample& serving, double dt, double t_start,
                        const ScenarioConfig& config) {
  StackCounters c;
  const int n_prb = config.bandwidth_prb;
  const bool active = ue.connected && !ue.interrupted;

  if (active) {
    const LinkAdaptation dl = link_adaptation(serving.sinr, n_prb);
    const LinkAdaptation ul = link_adaptation(serving.ul_sinr, n_prb);
    const bool dl_pending = ue.dl_bytes_remaining > 0.0;
    const bool ul_pending = ue.ul_bytes_remaining > 0.0;
    const Transfer tdl = transfer(ue.dl_bytes_remaining, dl, dt, ue.ramp_factor);
    const Transfer tul = transfer(ue.ul_bytes_remaining, ul, dt, ue.ramp_factor);

    fill_direction(c.dl, dl, tdl, serving.sinr, dt, n_prb, dl_pending);
    fill_direction(c.ul, ul, tul, serving.ul_sinr, dt, n_prb, ul_pending);
    c.dl_cqi_inband = dl.cqi;

    if (ue.initial_mcs_pending) {
      ue.initial_mcs = dl.mcs;
      ue.initial_mcs_pending = false;
    }

    if (dl_pending && tdl.delivered >= ue.dl_bytes_remaining) {
      ue.download_complete_time = t_start + dt * tdl.window_fraction;
      ue.dl_bytes_remaining = 0.0;
    } else {
      ue.dl_bytes_remaining -= tdl.delivered;
    }
    ue.ul_bytes_remaining = std::max(0.0, ue.ul_bytes_remaining - tul.delivered);

    if (tdl.delivered > 0.0) ue.moving = true;
    if (tdl.delivered > 0.0 || tul.delivered > 0.0) ue.ramp_factor = std::min(1.0, 2.0 * ue.ramp_factor);
  }

  c.initial_mcs = ue.initial_mcs;
  c.rlf_total = ue.rlf_count;
  c.handover_total = ue.handover_count;
  c.first_target_cell = ue.first_target_cell;
  ue.interrupted = false;
  return c;
}

}  // namespace holab
