#pragma once

#include "admit/cqlf.hpp"
#include "admit/scenario_config.hpp"
#include "admit/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace admit {

/// Column names for a trace with `regions` gain rows per axis.
std::vector<std::string> trace_columns(std::size_t regions);

/// CSV with a header row; values use "%.9g". Regions are 1-based in the file.
void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace);

/// Parsed numeric table, mainly for tests and figure export.
struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Throws AdmitError(parse_error) for an unknown column.
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

/// Metrics plus abort details (when any) as JSON and as "key: value" lines.
std::string metrics_json(const ScenarioResult& result, const std::string& scenario_name);
std::string metrics_text(const ScenarioResult& result, const std::string& scenario_name);

/// Writes trace, metrics (json and text) and certificate under `dir` using the
/// config's output names. Throws AdmitError(io_error).
void write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result);

}  // namespace admit
