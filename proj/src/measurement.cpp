#include "holab/measurement.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace holab {

int MeasurementReport::real_neighbor_count() const {
  return static_cast<int>(std::count_if(neighbors.begin(), neighbors.end(),
                                        [](const CellMeasurement& m) { return m.is_real(); }));
}

const CellMeasurement* MeasurementReport::real_neighbor(int rank) const {
  if (rank < 1 || rank > real_neighbor_count()) return nullptr;
  return &neighbors[rank - 1];
}

MeasurementReport build_report(std::span<const RadioSample> radio, int serving_cell, int max_neighbors) {
  MeasurementReport report;
  bool found = false;
  std::vector<CellMeasurement> candidates;
  for (const RadioSample& s : radio) {
    if (s.cell_id == serving_cell) {
      report.serving = {s.cell_id, s.rsrp, s.rsrq};
      found = true;
    } else if (s.rsrp >= kDetectionFloorDbm) {
      candidates.push_back({s.cell_id, s.rsrp, s.rsrq});
    }
  }
  if (!found) throw std::invalid_argument("serving cell " + std::to_string(serving_cell) + " not in radio samples");

  std::sort(candidates.begin(), candidates.end(), [](const CellMeasurement& a, const CellMeasurement& b) {
    return a.rsrp != b.rsrp ? a.rsrp > b.rsrp : a.cell_id < b.cell_id;
  });
  const int width = std::min(max_neighbors, kReportedNeighbors);
  if (static_cast<int>(candidates.size()) > width) candidates.resize(width);
  candidates.resize(kReportedNeighbors);  // sentinel padding
  report.neighbors = std::move(candidates);
  return report;
}

}  // namespace holab
