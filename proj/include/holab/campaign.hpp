#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "holab/dataset.hpp"
#include "holab/handover.hpp"

namespace holab {

/// Traces of one run under Forced(k) for every k in 1..max_neighbors,
/// grouped rank-major: index [k - 1][ue].
std::vector<std::vector<TraceLog>> run_forced_campaign(const Scenario& scenario, std::uint64_t run_seed);

/// Forced campaigns for run seeds 1..num_runs, flattened into a dataset.
Dataset build_campaign_dataset(const Scenario& scenario, int num_runs, int first_run = 1);

/// Plain-text trace dump. Values are printed with 17 significant digits so
/// identical runs produce identical bytes.
void write_traces(const std::vector<TraceLog>& traces, std::ostream& out);
void write_traces(const std::vector<TraceLog>& traces, const std::filesystem::path& path);

}  // namespace holab
