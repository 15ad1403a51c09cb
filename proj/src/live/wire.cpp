#include "admit/live/wire.hpp"

#include <json.hpp>

namespace admit::live {

using json = nlohmann::ordered_json;

namespace {

json vec(const Vec2& v) { return json::array({v(0), v(1)}); }
json row(const Row2& v) { return json::array({v(0), v(1)}); }

const char* kind_name(WireCommand::Kind k)
{
  switch (k)
  {
    case WireCommand::Kind::set_force:
      return "set_force";
    case WireCommand::Kind::release:
      return "release";
    case WireCommand::Kind::pause:
      return "pause";
    case WireCommand::Kind::resume:
      return "resume";
    case WireCommand::Kind::reset:
      return "reset";
    case WireCommand::Kind::set_config_overrides:
      return "set_config_overrides";
  }
  return "?";
}

[[noreturn]] void bad(const std::string& what) { throw AdmitError(ErrorKind::parse_error, "command: " + what); }

}  // namespace

WireCommand decode_command(std::string_view text)
{
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) bad("not a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) bad("type: missing or not a string");
  const std::string type = j["type"].get<std::string>();

  WireCommand cmd;
  bool known = false;
  for (auto k : {WireCommand::Kind::set_force, WireCommand::Kind::release, WireCommand::Kind::pause,
                 WireCommand::Kind::resume, WireCommand::Kind::reset, WireCommand::Kind::set_config_overrides})
  {
    if (type == kind_name(k))
    {
      cmd.kind = k;
      known = true;
    }
  }
  if (!known) bad("type: unknown command '" + type + "'");

  if (cmd.kind == WireCommand::Kind::set_force)
  {
    if (!j.contains("force_n")) bad("force_n: required for set_force");
    const json& f = j["force_n"];
    if (!f.is_array() || f.size() != 2 || !f[0].is_number() || !f[1].is_number())
      bad("force_n: expected [fx, fy] in newtons");
    cmd.force = Vec2(f[0].get<double>(), f[1].get<double>());
    if (!cmd.force.allFinite()) bad("force_n: must be finite");
  }
  if (cmd.kind == WireCommand::Kind::set_config_overrides)
  {
    if (!j.contains("overrides") || !j["overrides"].is_array()) bad("overrides: expected an array of \"path=value\"");
    for (const auto& o : j["overrides"])
    {
      if (!o.is_string()) bad("overrides: entries must be strings");
      cmd.overrides.push_back(o.get<std::string>());
    }
  }
  return cmd;
}

std::string encode_command(const WireCommand& command)
{
  json j;
  j["type"] = kind_name(command.kind);
  if (command.kind == WireCommand::Kind::set_force) j["force_n"] = vec(command.force);
  if (command.kind == WireCommand::Kind::set_config_overrides) j["overrides"] = command.overrides;
  return j.dump();
}

std::string encode_snapshot(const StateSnapshot& s, std::uint64_t seq, bool paused)
{
  const TraceRecord& r = s.record;
  json j;
  j["type"] = "snapshot";
  j["schema_version"] = kWireSchemaVersion;
  j["seq"] = seq;
  j["epoch"] = s.epoch;
  j["step"] = r.step;
  j["t_s"] = s.session_time;
  j["epoch_t_s"] = r.t;
  j["q_rad"] = vec(r.q);
  j["qdot_radps"] = vec(r.qdot);
  j["x_base_m"] = vec(s.x_base);
  j["x_dev_m"] = vec(r.x_dev);
  json axes = json::array();
  for (std::size_t a = 0; a < kAxes; ++a)
  {
    const AxisRecord& ax = r.axes[a];
    json k = json::array();
    for (const auto& kx : ax.k_x) k.push_back(row(kx));
    json entry;
    entry["delta"] = vec(ax.delta);
    entry["delta_m"] = vec(ax.delta_m);
    entry["region"] = ax.region + 1;
    entry["k_x"] = k;
    entry["v"] = ax.lyapunov;
    entry["limit_exceeded"] = s.limit_exceeded[a];
    axes.push_back(entry);
  }
  j["axes"] = axes;
  j["applied_force_n"] = vec(r.f_ext);
  j["torque_nm"] = vec(r.torque);
  j["safety_flag"] = s.safety_flag;
  j["paused"] = paused;
  return j.dump();
}

std::string encode_hello(const ScenarioConfig& config, const CqlfCertificate& certificate, const Vec2& operating_point)
{
  json j;
  j["type"] = "hello";
  j["schema_version"] = kWireSchemaVersion;
  j["scenario"] = config.name;
  j["dt_s"] = config.dt;
  j["snapshot_decimation"] = config.live.snapshot_decimation;
  j["time_scale"] = config.live.time_scale;
  j["f_max_n"] = config.f_max;
  j["safety_limit_m"] = config.safety_limit;
  j["switching_threshold_m"] = config.switching_threshold();
  j["regions"] = config.subsystems.size();
  j["operating_point_m"] = vec(operating_point);
  j["q0_rad"] = vec(config.q0);
  j["link_lengths_m"] = json::array({config.manipulator.l1, config.manipulator.l2});
  j["lyapunov_p"] = json::array({row(certificate.P.row(0)), row(certificate.P.row(1))});
  return j.dump();
}

std::string encode_terminal(ErrorKind kind, std::size_t step, double session_time, std::size_t epoch,
                            const std::string& detail)
{
  json j;
  j["type"] = "terminal";
  j["schema_version"] = kWireSchemaVersion;
  j["reason"] = std::string(to_string(kind));
  j["epoch"] = epoch;
  j["step"] = step;
  j["t_s"] = session_time;
  j["detail"] = detail;
  return j.dump();
}

std::string encode_error(ErrorKind kind, const std::string& detail)
{
  json j;
  j["type"] = "error";
  j["schema_version"] = kWireSchemaVersion;
  j["reason"] = std::string(to_string(kind));
  j["detail"] = detail;
  return j.dump();
}

}  // namespace admit::live
