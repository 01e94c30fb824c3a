#pragma once

#include <string>
#include <vector>

#include "prunelab/prune_loop.hpp"
#include "prunelab/stat_model.hpp"

namespace prunelab {

/// Shortest string that round-trips the double exactly (17 significant
/// digits).
std::string format_real(double v);

std::string census_string(const std::vector<Index>& census);  // "16;32;64;32"

/// CSV bodies are UTF-8 with LF line endings and a fixed header; comment
/// lines start with '#'.
std::string scenario_csv(const statmodel::ScenarioEstimates& est);
std::string sweep_csv(const std::vector<statmodel::SweepRow>& rows);
std::string trajectory_csv(const std::string& strategy_name, const PruneSchedule& schedule,
                           const std::vector<TrajectoryPoint>& points);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace prunelab
