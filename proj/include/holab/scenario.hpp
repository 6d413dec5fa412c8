#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holab/geometry.hpp"

namespace holab {

/// Deployment, radio and traffic parameters of one simulated network.
///
/// Defaults reproduce the full-scale macro scenario: 7 three-sector sites at
/// 500 m inter-site distance, 5 MHz, 30 UEs per sector in clusters 100 m in
/// front of each sector, 40 s runs sampled every 200 ms.
struct ScenarioConfig {
  double inter_site_distance = 500.0;  // m
  int num_sites = 7;                   // 1 center + up to 6 ring sites
  int bandwidth_prb = 25;
  double enb_tx_power = 46.0;  // dBm
  double ue_tx_power = 23.0;   // dBm
  double enb_height = 30.0;    // m
  double ue_height = 1.5;      // m
  double carrier_freq = 2000.0;  // MHz
  double antenna_beamwidth = 70.0;  // deg
  double antenna_max_atten = 20.0;  // dB
  double obstacle_height = 35.0;    // m
  double obstacle_loss = 30.0;      // dB per crossed obstacle
  int num_obstacles = 10;
  double cluster_distance = 100.0;  // m
  double cluster_diameter = 50.0;   // m
  int ues_per_sector = 10;
  double ue_speed = 10.0;      // m/s
  double sim_duration = 40.0;  // s
  double sample_period = 0.2;  // s
  double file_size = 1'500'000.0;  // bytes
  int max_neighbors = 8;
  int num_runs = 20;
  double noise_figure = 9.0;    // dB
  double a2_threshold = -110.0;  // dBm
  std::uint64_t obstacle_seed = 1;

  /// Number of sampling windows per run (200 at defaults).
  int num_windows() const;

  /// Throws UsageError naming the first violated constraint.
  void validate() const;
};

struct Cell {
  int cell_id = 0;
  Vec2 site_position;
  double azimuth = 0.0;  // deg, counter-clockwise from +x
  double tx_power = 46.0;  // dBm
};

/// Axis-aligned rectangular building footprint.
struct Obstacle {
  Vec2 center;
  double width = 0.0;  // extent along x
  double depth = 0.0;  // extent along y
  double height = 0.0;

  Vec2 min_corner() const { return {center.x - width / 2, center.y - depth / 2}; }
  Vec2 max_corner() const { return {center.x + width / 2, center.y + depth / 2}; }
  bool contains(Vec2 p) const;

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct Scenario {
  ScenarioConfig config;
  std::vector<Cell> cells;
  std::vector<Obstacle> obstacles;
  /// One UE cluster center per cell, same order as `cells`.
  std::vector<Vec2> cluster_centers;

  const Cell& cell(int cell_id) const;
  int num_cells() const { return static_cast<int>(cells.size()); }
};

/// Hexagonal layout positions: center first, then the six ring sites.
std::vector<Vec2> site_positions(const ScenarioConfig& config);

/// Radius of the disc in which obstacles are dropped.
double deployment_radius(const ScenarioConfig& config);

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t obstacle_seed);
inline Scenario build_scenario(const ScenarioConfig& config) {
  return build_scenario(config, config.obstacle_seed);
}

}  // namespace holab
