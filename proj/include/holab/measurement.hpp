#pragma once

#include <span>
#include <vector>

#include "holab/radio.hpp"

namespace holab {

inline constexpr int kReportedNeighbors = 8;
inline constexpr double kDetectionFloorDbm = -140.0;
inline constexpr int kSentinelCellId = 0;
inline constexpr double kSentinelRsrp = -140.0;
inline constexpr double kSentinelRsrq = -30.0;

struct CellMeasurement {
  int cell_id = kSentinelCellId;
  double rsrp = kSentinelRsrp;
  double rsrq = kSentinelRsrq;

  bool is_real() const { return cell_id != kSentinelCellId; }
  friend bool operator==(const CellMeasurement&, const CellMeasurement&) = default;
};

/// Serving cell plus the strongest neighbors, padded to a fixed width with
/// sentinel entries so that every report has the same shape.
struct MeasurementReport {
  CellMeasurement serving;
  std::vector<CellMeasurement> neighbors;  // rsrp descending, ties by cell id

  int real_neighbor_count() const;
  /// 1-based rank among real neighbors; null when rank exceeds the count.
  const CellMeasurement* real_neighbor(int rank) const;
};

/// Throws std::invalid_argument if `serving_cell` is absent from `radio`.
MeasurementReport build_report(std::span<const RadioSample> radio, int serving_cell,
                               int max_neighbors = kReportedNeighbors);

}  // namespace holab
