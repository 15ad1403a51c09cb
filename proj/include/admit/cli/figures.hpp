#pragma once

#include "admit/scenario_config.hpp"
#include "admit/sim.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace admit::cli {

/// Names of the files written by write_figures, in order.
std::vector<std::string> figure_files();

/// Plot-ready CSVs (reference output, gains, x-y path with the safety
/// square, torques) and a gnuplot script per figure.
void write_figures(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result);

}  // namespace admit::cli
