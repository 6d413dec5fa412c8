#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "holab/scenario.hpp"

namespace holab {

inline constexpr double kMinPathlossDistance = 1.0;  // m

/// Per-cell measurement at one UE position.
struct RadioSample {
  int cell_id = 0;
  double rsrp = 0.0;    // dBm per resource element
  double rsrq = 0.0;    // dB
  double sinr = 0.0;    // dB, downlink wideband
  double ul_sinr = 0.0;  // dB, uplink toward this cell at ue_tx_power
};

/// COST-231 Hata, large-city mobile correction, C = 3 dB.
double pathloss_db(Vec2 tx_pos, Vec2 rx_pos, const ScenarioConfig& config);

/// Parabolic horizontal pattern: min(12 (theta/beamwidth)^2, max_atten).
double antenna_attenuation_db(const Cell& cell, Vec2 ue_pos, const ScenarioConfig& config);

/// True when the segment a-b touches the rectangle footprint.
bool segment_intersects(Vec2 a, Vec2 b, const Obstacle& obstacle);

double blockage_loss_db(Vec2 tx_pos, Vec2 rx_pos, std::span<const Obstacle> obstacles,
                        double loss_per_obstacle);

/// Thermal noise plus noise figure over the occupied bandwidth, in dBm.
double thermal_noise_dbm(const ScenarioConfig& config);

/// Occupied bandwidth: 180 kHz per PRB (4.5 MHz at 25 PRBs).
double occupied_bandwidth_hz(const ScenarioConfig& config);

/// One sample per cell, in scenario cell order. Full-load interference.
std::vector<RadioSample> compute_radio(const Scenario& scenario, Vec2 ue_pos);

/// Index of the strongest-RSRP sample; ties go to the lower cell id.
std::size_t best_rsrp_index(std::span<const RadioSample> radio);

struct Bounds {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double height = 0.0;
};

/// Radio environment map. Pixels are row-major: row j covers y0 + (j + 0.5) * res.
struct RemGrid {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double resolution = 0.0;
  std::vector<int> best_cell;
  std::vector<double> best_sinr;

  Vec2 pixel_center(int ix, int iy) const {
    return {x0 + (ix + 0.5) * resolution, y0 + (iy + 0.5) * resolution};
  }
};

RemGrid render_rem(const Scenario& scenario, const Bounds& bounds, double resolution);

/// `rem <nx> <ny> <x0> <y0> <res>` header, then `x y cell_id sinr_db` per pixel.
void write_rem(std::ostream& out, const RemGrid& grid);

}  // namespace holab
