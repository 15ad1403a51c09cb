#include "admit/cli/commands.hpp"

#include "admit/cli/figures.hpp"
#include "admit/cqlf.hpp"
#include "admit/error.hpp"
#include "admit/scenario_config.hpp"
#include "admit/sim.hpp"
#include "admit/trace_io.hpp"

#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace admit::cli {

namespace {

void print_error(std::ostream& err, const AdmitError& e)
{
  err << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
}

ScenarioConfig load_with_overrides(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
  ScenarioConfig config = load_config(path);
  if (!overrides.empty()) config = apply_overrides(config, overrides);
  return config;
}

struct RunOutcome
{
  int code = kExitOk;
  std::string out;
  std::string err;
};

RunOutcome run_one(const std::filesystem::path& config_path,
                   const std::filesystem::path& dir,
                   const std::vector<std::string>& overrides,
                   std::optional<bool> audit)
{
  RunOutcome outcome;
  std::ostringstream out, err;
  try
  {
    ScenarioConfig config = load_with_overrides(config_path, overrides);
    if (audit)
    {
      config.audit.lyapunov = *audit;
      config.audit.skew_symmetry = *audit;
      config.audit.partition = *audit;
      config.audit.linearization = *audit;
    }
    spdlog::info("running {} ({} steps) into {}", config.name, config.step_count(), dir.string());
    const auto start = std::chrono::steady_clock::now();
    const ScenarioResult result = run_scenario(config);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_run_outputs(dir, config, result);
    spdlog::info("{} finished in {:.3f} s", config.name, elapsed);

    const RunMetrics& m = result.metrics;
    out << config.name << ": " << m.steps << " steps, max|delta1| x " << std::setprecision(6) << m.max_abs_delta1[0]
        << " m, y " << m.max_abs_delta1[1] << " m, max|tau| " << m.max_torque << " N m, audit "
        << (m.audit.passed() ? "passed" : "FAILED") << '\n';
    if (!result.ok())
    {
      const SimAbort& a = *result.abort;
      err << "error[" << to_string(a.kind) << "]: " << config.name << " aborted at step " << a.step << " (t = " << a.t
          << " s): " << a.detail << '\n';
      outcome.code = kExitFailed;
    }
    else if (!m.audit.passed())
    {
      err << "error[audit]: " << config.name << " audit violations: lyapunov " << m.audit.lyapunov_violations
          << ", skew " << m.audit.skew_violations << ", partition " << m.audit.partition_violations
          << ", linearization " << m.audit.linearization_violations << '\n';
      outcome.code = kExitFailed;
    }
  }
  catch (const AdmitError& e)
  {
    err << config_path.string() << ": ";
    print_error(err, e);
    outcome.code = kExitUsage;
  }
  outcome.out = out.str();
  outcome.err = err.str();
  return outcome;
}

}  // namespace

void configure_logging()
{
  auto logger = spdlog::stderr_color_mt("admit_switch");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ADMIT_SWITCH_LOG"))
  {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept "off" when spelled out
    if (level != spdlog::level::off || std::string(env) == "off")
      spdlog::set_level(level);
    else
      spdlog::warn("ADMIT_SWITCH_LOG={} not recognized; using warn", env);
  }
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err)
{
  if (options.configs.empty())
  {
    err << "error[invalid_config]: run needs at least one config file\n";
    return kExitUsage;
  }
  const std::size_t n = options.configs.size();
  std::vector<std::filesystem::path> dirs(n, options.out_dir);
  if (n > 1)
    for (std::size_t i = 0; i < n; ++i) dirs[i] = options.out_dir / options.configs[i].stem();

  std::vector<RunOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++)
      outcomes[i] = run_one(options.configs[i], dirs[i], options.overrides, options.audit);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(n)));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }

  int code = kExitOk;
  for (const auto& o : outcomes)
  {
    out << o.out;
    err << o.err;
    code = std::max(code, o.code);
  }
  return code;
}

int cmd_certify(const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& check_p,
                const std::vector<std::string>& overrides,
                std::ostream& out,
                std::ostream& err)
{
  try
  {
    const ScenarioConfig config = load_with_overrides(config_path, overrides);
    config.validate();
    if (check_p)
    {
      const Mat2 P = read_matrix_file(*check_p);
      const VerifyResult verified = verify_cqlf(config.subsystems, P);
      if (const auto* cert = std::get_if<CqlfCertificate>(&verified))
      {
        out << format_certificate(*cert);
        return kExitOk;
      }
      const auto& rejection = std::get<CqlfRejection>(verified);
      out << format_rejection(rejection);
      err << "error[no_cqlf]: supplied P rejected: " << rejection.reason << '\n';
      return kExitFailed;
    }
    const SearchResult searched = search_cqlf(config.subsystems, config.cqlf_max_iter);
    if (const auto* cert = std::get_if<CqlfCertificate>(&searched))
    {
      out << format_certificate(*cert);
      return kExitOk;
    }
    const auto& report = std::get<InfeasibleReport>(searched);
    out << format_infeasible(report);
    err << "error[no_cqlf]: no common Lyapunov matrix after " << report.iterations << " iterations\n";
    return kExitFailed;
  }
  catch (const AdmitError& e)
  {
    print_error(err, e);
    return kExitUsage;
  }
}

int cmd_figures(const std::filesystem::path& config_path,
                const std::filesystem::path& out_dir,
                const std::vector<std::string>& overrides,
                std::ostream& out,
                std::ostream& err)
{
  try
  {
    const ScenarioConfig config = load_with_overrides(config_path, overrides);
    const ScenarioResult result = run_scenario(config);
    write_figures(out_dir, config, result);
    for (const auto& f : figure_files()) out << (out_dir / f).string() << '\n';
    if (!result.ok())
    {
      const SimAbort& a = *result.abort;
      err << "error[" << to_string(a.kind) << "]: aborted at step " << a.step << " (t = " << a.t << " s): " << a.detail
          << '\n';
      return kExitFailed;
    }
    return kExitOk;
  }
  catch (const AdmitError& e)
  {
    print_error(err, e);
    return kExitUsage;
  }
}

Mat2 read_matrix_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw AdmitError(ErrorKind::io_error, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<double> values;
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (!j.is_discarded())
  {
    const bool nested = j.is_array() && j.size() == 2 && j[0].is_array() && j[1].is_array();
    try
    {
      if (nested)
      {
        for (const auto& row : j)
          for (const auto& v : row) values.push_back(v.get<double>());
      }
      else if (j.is_array())
      {
        for (const auto& v : j) values.push_back(v.get<double>());
      }
    }
    catch (const nlohmann::json::exception&)
    {
      values.clear();
    }
  }
  else
  {
    std::string cleaned = text;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ss(cleaned);
    double v;
    while (ss >> v) values.push_back(v);
    if (!ss.eof()) values.clear();
  }
  if (values.size() != 4)
    throw AdmitError(ErrorKind::parse_error, path.string() + ": expected a 2x2 matrix ([[a, b], [c, d]] or four numbers)");
  Mat2 P;
  P << values[0], values[1], values[2], values[3];
  return P;
}

}  // namespace admit::cli
