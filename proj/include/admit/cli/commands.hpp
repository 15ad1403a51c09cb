#pragma once

#include "admit/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace admit::cli {

/// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // run aborted, certificate refused
inline constexpr int kExitUsage = 2;   // bad config, bad arguments, io

struct RunOptions
{
  std::vector<std::filesystem::path> configs;
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;
  std::optional<bool> audit;  // all / none; unset keeps the config's toggles
  unsigned jobs = 1;
};

/// Several configs write into out_dir/<config stem>/, one writes into out_dir.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

int cmd_certify(const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& check_p,
                const std::vector<std::string>& overrides,
                std::ostream& out,
                std::ostream& err);

int cmd_figures(const std::filesystem::path& config_path,
                const std::filesystem::path& out_dir,
                const std::vector<std::string>& overrides,
                std::ostream& out,
                std::ostream& err);

/// A 2x2 matrix from JSON ([[a, b], [c, d]]) or four whitespace-separated numbers.
Mat2 read_matrix_file(const std::filesystem::path& path);

/// spdlog level from ADMIT_SWITCH_LOG (trace, debug, info, warn, error, off); warn by default.
void configure_logging();

}  // namespace admit::cli
