#include "holab/campaign.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "holab/error.hpp"

namespace holab {

std::vector<std::vector<TraceLog>> run_forced_campaign(const Scenario& scenario, std::uint64_t run_seed) {
  std::vector<std::vector<TraceLog>> out;
  for (int k = 1; k <= scenario.config.max_neighbors; ++k) {
    out.push_back(run_simulation(scenario, ForcedPolicy{k}, run_seed));
  }
  return out;
}

Dataset build_campaign_dataset(const Scenario& scenario, int num_runs, int first_run) {
  if (num_runs < 1) throw UsageError("num_runs must be >= 1");
  std::vector<TraceLog> traces;
  for (int r = first_run; r < first_run + num_runs; ++r) {
    for (auto& rank_traces : run_forced_campaign(scenario, static_cast<std::uint64_t>(r))) {
      for (auto& t : rank_traces) traces.push_back(std::move(t));
    }
  }
  return build_dataset(traces, scenario.config.num_windows());
}

void write_traces(const std::vector<TraceLog>& traces, std::ostream& out) {
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const TraceLog& t : traces) {
    out << "trace run=" << t.run_id << " ue=" << t.ue_id << " policy=" << t.policy << " rank=" << t.rank
        << " target=" << t.target_cell << " download_time=" << num(t.download_time) << " handovers=" << t.handovers
        << " rlfs=" << t.rlfs << " windows=" << t.windows.size() << '\n';
    for (std::size_t w = 0; w < t.windows.size(); ++w) {
      out << w;
      for (double v : t.windows[w]) out << ' ' << num(v);
      out << '\n';
    }
  }
}

void write_traces(const std::vector<TraceLog>& traces, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_traces(traces, out);
}

}  // namespace holab
