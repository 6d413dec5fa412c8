#pragma once

#include <array>
#include <span>
#include <string_view>

#include "holab/measurement.hpp"
#include "holab/traffic.hpp"

namespace holab {

inline constexpr int kNumFeatures = 84;

/// One sampling window of protocol-stack measurements. Slot i holds the
/// measurement numbered i + 1 in the feature catalogue (1 = UL throughput,
/// 84 = UL HARQ NACKs).
using FeatureVector = std::array<double, kNumFeatures>;

/// Column name for 1-based feature number `index`, e.g. "f08_rsrp_serving".
std::string_view feature_name(int index);

/// True for the 1-based slots that carry cell ids (7, 10, 13, ..., 31, 36).
bool is_cell_id_feature(int index);

FeatureVector extract_features(const StackCounters& counters, const MeasurementReport& report,
                               std::span<const RadioSample> radio);

/// Number of extractor rules that write each slot; every entry must be 1.
std::array<int, kNumFeatures> feature_coverage();

}  // namespace holab
