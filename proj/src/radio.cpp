#include "holab/radio.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "holab/error.hpp"

namespace holab {

namespace {

constexpr double kThermalDensityDbmHz = -174.0;
constexpr double kPrbBandwidthHz = 180e3;
constexpr double kSubcarriersPerPrb = 12.0;
// Uplink interference-over-thermal margin; uplink interferers are not modeled.
constexpr double kUplinkIotDb = 3.0;

double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace

double pathloss_db(Vec2 tx_pos, Vec2 rx_pos, const ScenarioConfig& config) {
  const double d_km = std::max(distance(tx_pos, rx_pos), kMinPathlossDistance) / 1000.0;
  const double f = config.carrier_freq;
  const double hb = config.enb_height;
  const double hm = config.ue_height;
  const double l = std::log10(11.75 * hm);
  const double a_hm = 3.2 * l * l - 4.97;
  constexpr double kMetroCorrection = 3.0;
  return 46.3 + 33.9 * std::log10(f) - 13.82 * std::log10(hb) - a_hm +
         (44.9 - 6.55 * std::log10(hb)) * std::log10(d_km) + kMetroCorrection;
}

double antenna_attenuation_db(const Cell& cell, Vec2 ue_pos, const ScenarioConfig& config) {
  const Vec2 d = ue_pos - cell.site_position;
  if (d.x == 0.0 && d.y == 0.0) return 0.0;
  const double theta = wrap_degrees(rad_to_deg(std::atan2(d.y, d.x)) - cell.azimuth);
  const double ratio = theta / config.antenna_beamwidth;
  return std::min(12.0 * ratio * ratio, config.antenna_max_atten);
}

bool segment_intersects(Vec2 a, Vec2 b, const Obstacle& obstacle) {
  // Liang-Barsky clipping against the footprint.
  const Vec2 lo = obstacle.min_corner();
  const Vec2 hi = obstacle.max_corner();
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - lo.x, hi.x - a.x, a.y - lo.y, hi.y - a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  return true;
}

double blockage_loss_db(Vec2 tx_pos, Vec2 rx_pos, std::span<const Obstacle> obstacles,
                        double loss_per_obstacle) {
  double loss = 0.0;
  for (const Obstacle& o : obstacles) {
    if (segment_intersects(tx_pos, rx_pos, o)) loss += loss_per_obstacle;
  }
  return loss;
}

double occupied_bandwidth_hz(const ScenarioConfig& config) {
  return kPrbBandwidthHz * config.bandwidth_prb;
}

double thermal_noise_dbm(const ScenarioConfig& config) {
  return kThermalDensityDbmHz + lin_to_db(occupied_bandwidth_hz(config)) + config.noise_figure;
}

std::vector<RadioSample> compute_radio(const Scenario& scenario, Vec2 ue_pos) {
  const ScenarioConfig& cfg = scenario.config;
  const double n_prb = cfg.bandwidth_prb;
  const double re_count_db = lin_to_db(kSubcarriersPerPrb * n_prb);
  const double noise_mw = db_to_lin(thermal_noise_dbm(cfg));
  const double noise_per_prb_mw = noise_mw / n_prb;

  std::vector<RadioSample> out(scenario.cells.size());
  std::vector<double> rsrp_mw(scenario.cells.size());
  double rssi_signal_per_prb = 0.0;
  for (std::size_t i = 0; i < scenario.cells.size(); ++i) {
    const Cell& c = scenario.cells[i];
    const double link_loss = pathloss_db(c.site_position, ue_pos, cfg) +
                             antenna_attenuation_db(c, ue_pos, cfg) +
                             blockage_loss_db(c.site_position, ue_pos, scenario.obstacles, cfg.obstacle_loss);
    out[i].cell_id = c.cell_id;
    out[i].rsrp = c.tx_power - re_count_db - link_loss;
    out[i].ul_sinr = cfg.ue_tx_power - link_loss - thermal_noise_dbm(cfg) - kUplinkIotDb;
    rsrp_mw[i] = db_to_lin(out[i].rsrp);
    rssi_signal_per_prb += kSubcarriersPerPrb * rsrp_mw[i];
  }

  const double rssi_per_prb = rssi_signal_per_prb + noise_per_prb_mw;
  const double total_wideband = rssi_signal_per_prb * n_prb;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].rsrq = lin_to_db(n_prb * rsrp_mw[i] / (n_prb * rssi_per_prb));
    const double own = kSubcarriersPerPrb * n_prb * rsrp_mw[i];
    out[i].sinr = lin_to_db(own / ((total_wideband - own) + noise_mw));
  }
  return out;
}

std::size_t best_rsrp_index(std::span<const RadioSample> radio) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < radio.size(); ++i) {
    if (radio[i].rsrp > radio[best].rsrp ||
        (radio[i].rsrp == radio[best].rsrp && radio[i].cell_id < radio[best].cell_id)) {
      best = i;
    }
  }
  return best;
}

RemGrid render_rem(const Scenario& scenario, const Bounds& bounds, double resolution) {
  if (!(resolution > 0)) throw UsageError("rem resolution must be > 0");
  if (!(bounds.width > 0) || !(bounds.height > 0)) throw UsageError("rem bounds must be non-empty");

  RemGrid grid;
  grid.nx = static_cast<int>(std::ceil(bounds.width / resolution - 1e-9));
  grid.ny = static_cast<int>(std::ceil(bounds.height / resolution - 1e-9));
  grid.x0 = bounds.x0;
  grid.y0 = bounds.y0;
  grid.resolution = resolution;
  grid.best_cell.resize(static_cast<std::size_t>(grid.nx) * grid.ny);
  grid.best_sinr.resize(grid.best_cell.size());

  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const auto radio = compute_radio(scenario, grid.pixel_center(ix, iy));
      std::size_t best = 0;
      for (std::size_t i = 1; i < radio.size(); ++i) {
        if (radio[i].sinr > radio[best].sinr) best = i;
      }
      const std::size_t p = static_cast<std::size_t>(iy) * grid.nx + ix;
      grid.best_cell[p] = radio[best].cell_id;
      grid.best_sinr[p] = radio[best].sinr;
    }
  }
  return grid;
}

void write_rem(std::ostream& out, const RemGrid& grid) {
  out << std::setprecision(10);
  out << "rem " << grid.nx << ' ' << grid.ny << ' ' << grid.x0 << ' ' << grid.y0 << ' '
      << grid.resolution << '\n';
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const std::size_t p = static_cast<std::size_t>(iy) * grid.nx + ix;
      const Vec2 c = grid.pixel_center(ix, iy);
      out << c.x << ' ' << c.y << ' ' << grid.best_cell[p] << ' ' << grid.best_sinr[p] << '\n';
    }
  }
}

}  // namespace holab
