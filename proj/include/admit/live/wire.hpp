#pragma once

#include "admit/cqlf.hpp"
#include "admit/error.hpp"
#include "admit/scenario_config.hpp"
#include "admit/sim.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace admit::live {

inline constexpr int kWireSchemaVersion = 1;

struct WireCommand
{
  enum class Kind
  {
    set_force,
    release,
    pause,
    resume,
    reset,
    set_config_overrides,
  };
  Kind kind = Kind::release;
  Vec2 force = Vec2::Zero();           // set_force, unclamped as received
  std::vector<std::string> overrides;  // set_config_overrides, "path=value"
};

/// Throws AdmitError(parse_error) naming the offending field.
WireCommand decode_command(std::string_view text);
std::string encode_command(const WireCommand& command);

/// Deterministic JSON: fixed key order, shortest round-trip numbers.
std::string encode_snapshot(const StateSnapshot& snapshot, std::uint64_t seq, bool paused);

/// Session parameters a client needs before the first snapshot.
std::string encode_hello(const ScenarioConfig& config, const CqlfCertificate& certificate, const Vec2& operating_point);

/// Simulation error that ended the session's current epoch.
std::string encode_terminal(ErrorKind kind, std::size_t step, double session_time, std::size_t epoch,
                            const std::string& detail);

/// Rejected command; the session continues.
std::string encode_error(ErrorKind kind, const std::string& detail);

}  // namespace admit::live
