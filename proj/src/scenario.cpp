#include "holab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "holab/error.hpp"
#include "holab/rng.hpp"

namespace holab {

namespace {

constexpr double kSiteClearance = 50.0;  // m kept free of obstacles around each site
constexpr double kObstacleMinSide = 40.0;
constexpr double kObstacleMaxSide = 120.0;

[[noreturn]] void reject(const std::string& field, const std::string& why) {
  throw UsageError("invalid scenario config: " + field + " " + why);
}

double distance_to_rect(Vec2 p, const Obstacle& o) {
  const Vec2 lo = o.min_corner();
  const Vec2 hi = o.max_corner();
  const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
  const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
  return std::hypot(dx, dy);
}

}  // namespace

int ScenarioConfig::num_windows() const {
  return static_cast<int>(std::llround(sim_duration / sample_period));
}

void ScenarioConfig::validate() const {
  if (!(inter_site_distance > 0)) reject("inter_site_distance", "must be > 0");
  if (num_sites < 1 || num_sites > 7) reject("num_sites", "must be in 1..7");
  if (bandwidth_prb < 1) reject("bandwidth_prb", "must be >= 1");
  if (!(enb_height > 0)) reject("enb_height", "must be > 0");
  if (!(ue_height > 0)) reject("ue_height", "must be > 0");
  if (!(carrier_freq > 0)) reject("carrier_freq", "must be > 0");
  if (!(antenna_beamwidth > 0)) reject("antenna_beamwidth", "must be > 0");
  if (antenna_max_atten < 0) reject("antenna_max_atten", "must be >= 0");
  if (!(obstacle_height > enb_height)) reject("obstacle_height", "must exceed enb_height");
  if (obstacle_loss < 0) reject("obstacle_loss", "must be >= 0");
  if (num_obstacles < 0) reject("num_obstacles", "must be >= 0");
  if (cluster_distance < 0) reject("cluster_distance", "must be >= 0");
  if (!(cluster_diameter > 0)) reject("cluster_diameter", "must be > 0");
  if (!(cluster_diameter < inter_site_distance)) reject("cluster_diameter", "must be < inter_site_distance");
  if (ues_per_sector < 1) reject("ues_per_sector", "must be >= 1");
  if (ue_speed < 0) reject("ue_speed", "must be >= 0");
  if (!(sample_period > 0)) reject("sample_period", "must be > 0");
  if (!(sim_duration > 0)) reject("sim_duration", "must be > 0");
  const double windows = sim_duration / sample_period;
  if (std::llround(windows) < 1 || std::abs(windows - std::llround(windows)) > 1e-9 * windows) {
    reject("sample_period", "must divide sim_duration into a whole number of windows");
  }
  if (!(file_size > 0)) reject("file_size", "must be > 0");
  if (max_neighbors < 1) reject("max_neighbors", "must be >= 1");
  if (num_runs < 1) reject("num_runs", "must be >= 1");
}

bool Obstacle::contains(Vec2 p) const {
  const Vec2 lo = min_corner();
  const Vec2 hi = max_corner();
  return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
}

const Cell& Scenario::cell(int cell_id) const {
  for (const Cell& c : cells) {
    if (c.cell_id == cell_id) return c;
  }
  std::ostringstream os;
  os << "unknown cell id " << cell_id;
  throw std::out_of_range(os.str());
}

std::vector<Vec2> site_positions(const ScenarioConfig& config) {
  std::vector<Vec2> sites{{0.0, 0.0}};
  for (int k = 0; k < 6 && static_cast<int>(sites.size()) < config.num_sites; ++k) {
    sites.push_back(config.inter_site_distance * heading_vector(30.0 + 60.0 * k));
  }
  return sites;
}

double deployment_radius(const ScenarioConfig& config) {
  const double ring = config.num_sites > 1 ? config.inter_site_distance : 0.0;
  return ring + config.inter_site_distance;
}

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t obstacle_seed) {
  config.validate();

  Scenario scenario;
  scenario.config = config;
  scenario.config.obstacle_seed = obstacle_seed;

  const std::vector<Vec2> sites = site_positions(config);
  int next_id = 1;
  for (const Vec2& site : sites) {
    for (int sector = 0; sector < 3; ++sector) {
      Cell c;
      c.cell_id = next_id++;
      c.site_position = site;
      c.azimuth = 120.0 * sector;
      c.tx_power = config.enb_tx_power;
      scenario.cells.push_back(c);
      scenario.cluster_centers.push_back(site + config.cluster_distance * heading_vector(c.azimuth));
    }
  }

  Rng rng(obstacle_seed, 0x0b57ac1e);
  const double radius = deployment_radius(config);
  while (static_cast<int>(scenario.obstacles.size()) < config.num_obstacles) {
    Obstacle o;
    const double r = radius * std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 360.0);
    o.center = r * heading_vector(phi);
    o.width = rng.uniform(kObstacleMinSide, kObstacleMaxSide);
    o.depth = rng.uniform(kObstacleMinSide, kObstacleMaxSide);
    o.height = config.obstacle_height;
    const bool near_site = std::any_of(sites.begin(), sites.end(), [&](Vec2 s) {
      return distance_to_rect(s, o) < kSiteClearance;
    });
    if (!near_site) scenario.obstacles.push_back(o);
  }
  return scenario;
}

}  // namespace holab
