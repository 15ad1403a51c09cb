#include "admit/cli/commands.hpp"
#include "admit/error.hpp"
#include "admit/live/service.hpp"
#include "admit/scenario_config.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>
#include <pthread.h>

namespace {

int serve(const std::filesystem::path& config_path,
          std::uint16_t port,
          bool any_address,
          const std::optional<std::filesystem::path>& trace_out,
          const std::vector<std::string>& overrides)
{
  using namespace admit;
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try
  {
    ScenarioConfig config = load_config(config_path);
    if (!overrides.empty()) config = apply_overrides(config, overrides);
    live::ServerOptions options;
    options.port = port;
    options.loopback_only = !any_address;
    options.trace_out = trace_out;
    live::LiveServer server(std::move(config), options);
    server.start();
    std::cout << "listening on ws://" << (any_address ? "0.0.0.0" : "127.0.0.1") << ":" << server.port() << "/"
              << std::endl;
    int received = 0;
    sigwait(&signals, &received);
    spdlog::info("signal {} received, stopping", received);
    server.stop();
    return cli::kExitOk;
  }
  catch (const AdmitError& e)
  {
    std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return cli::kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv)
{
  admit::cli::configure_logging();

  CLI::App app{"Switched model-reference admittance control simulator"};
  app.require_subcommand(1);

  admit::cli::RunOptions run_options;
  std::string audit = "config";
  auto* run = app.add_subcommand("run", "Simulate scenarios and write trace.csv, metrics and certificate");
  run->add_option("config", run_options.configs, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_options.out_dir, "Output directory")->required();
  run->add_option("--override", run_options.overrides, "path=value, e.g. force.amplitude=0");
  run->add_option("--audit", audit, "Run all audits, none, or as configured")
      ->check(CLI::IsMember({"all", "none", "config"}));
  run->add_option("--jobs", run_options.jobs, "Scenario files run in parallel")->check(CLI::PositiveNumber);

  std::filesystem::path certify_config;
  std::optional<std::filesystem::path> check_p;
  std::vector<std::string> certify_overrides;
  auto* certify = app.add_subcommand("certify", "Search a common Lyapunov matrix, or check a given one");
  certify->add_option("config", certify_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  certify->add_option("--check-p", check_p, "File with P as [[a, b], [c, d]] or four numbers")
      ->check(CLI::ExistingFile);
  certify->add_option("--override", certify_overrides, "path=value");

  std::filesystem::path figures_config, figures_out;
  std::vector<std::string> figures_overrides;
  auto* figures = app.add_subcommand("figures", "Plot-ready CSVs and gnuplot scripts for the four figures");
  figures->add_option("config", figures_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  figures->add_option("--out", figures_out, "Output directory")->required();
  figures->add_option("--override", figures_overrides, "path=value");

  std::filesystem::path serve_config;
  std::uint16_t port = 8765;
  bool any_address = false;
  std::optional<std::filesystem::path> trace_out;
  std::vector<std::string> serve_overrides;
  auto* serve_cmd = app.add_subcommand("serve", "Interactive session over a websocket");
  serve_cmd->add_option("config", serve_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port, "TCP port; 0 picks a free one");
  serve_cmd->add_flag("--any-address", any_address, "Listen on all interfaces instead of loopback");
  serve_cmd->add_option("--trace-out", trace_out, "Write the full-rate trace here on shutdown");
  serve_cmd->add_option("--override", serve_overrides, "path=value");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : admit::cli::kExitUsage;
  }

  if (*run)
  {
    if (audit != "config") run_options.audit = audit == "all";
    return admit::cli::cmd_run(run_options, std::cout, std::cerr);
  }
  if (*certify) return admit::cli::cmd_certify(certify_config, check_p, certify_overrides, std::cout, std::cerr);
  if (*figures) return admit::cli::cmd_figures(figures_config, figures_out, figures_overrides, std::cout, std::cerr);
  return serve(serve_config, port, any_address, trace_out, serve_overrides);
}
