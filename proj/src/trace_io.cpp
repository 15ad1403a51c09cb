#include "admit/trace_io.hpp"

#include "admit/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace admit {

using json = nlohmann::ordered_json;

namespace {

const char* kAxisName[kAxes] = {"x", "y"};

void put(std::string& line, double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  if (!line.empty()) line.push_back(',');
  line.append(buf);
}

std::ofstream open_out(const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out) throw AdmitError(ErrorKind::io_error, "cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::vector<std::string> trace_columns(std::size_t regions)
{
  std::vector<std::string> cols = {"t_s",     "q1_rad",  "q2_rad",  "qdot1_radps", "qdot2_radps",
                                   "x_dev_m", "y_dev_m", "xdot_mps", "ydot_mps"};
  for (const char* a : kAxisName)
  {
    const std::string s = std::string("_") + a;
    cols.push_back("delta1" + s + "_m");
    cols.push_back("delta2" + s + "_mps");
    cols.push_back("delta_m1" + s + "_m");
    cols.push_back("delta_m2" + s + "_mps");
    cols.push_back("region" + s);
    for (std::size_t i = 1; i <= regions; ++i)
    {
      cols.push_back("kx" + std::to_string(i) + s + "_1");
      cols.push_back("kx" + std::to_string(i) + s + "_2");
    }
    cols.push_back("v" + s);
  }
  for (const char* c : {"fext_x_n", "fext_y_n", "f_x_n", "f_y_n", "tau1_nm", "tau2_nm", "det_j"}) cols.push_back(c);
  return cols;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace)
{
  const auto cols = trace_columns(trace.regions);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  std::string line;
  for (const TraceRecord& r : trace.rows)
  {
    line.clear();
    put(line, r.t);
    for (double v : {r.q(0), r.q(1), r.qdot(0), r.qdot(1), r.x_dev(0), r.x_dev(1), r.xdot(0), r.xdot(1)}) put(line, v);
    for (const AxisRecord& ax : r.axes)
    {
      put(line, ax.delta(0));
      put(line, ax.delta(1));
      put(line, ax.delta_m(0));
      put(line, ax.delta_m(1));
      put(line, static_cast<double>(ax.region + 1));
      for (std::size_t i = 0; i < trace.regions; ++i)
      {
        put(line, ax.k_x.at(i)(0));
        put(line, ax.k_x.at(i)(1));
      }
      put(line, ax.lyapunov);
    }
    for (double v : {r.f_ext(0), r.f_ext(1), r.force(0), r.force(1), r.torque(0), r.torque(1), r.det_j}) put(line, v);
    out << line << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace)
{
  auto out = open_out(path);
  write_trace_csv(out, trace);
  if (!out) throw AdmitError(ErrorKind::io_error, "write failed: " + path.string());
}

std::size_t CsvTable::column(const std::string& name) const
{
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw AdmitError(ErrorKind::parse_error, "no column named " + name);
}

CsvTable read_csv(std::istream& in)
{
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw AdmitError(ErrorKind::parse_error, "csv: missing header");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
      try
      {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      }
      catch (const std::exception&)
      {
        throw AdmitError(ErrorKind::parse_error, "csv line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != table.header.size())
      throw AdmitError(ErrorKind::parse_error, "csv line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(table.header.size()) + " fields");
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw AdmitError(ErrorKind::io_error, "cannot open " + path.string());
  return read_csv(in);
}

namespace {

json metrics_object(const ScenarioResult& result, const std::string& name)
{
  const RunMetrics& m = result.metrics;
  json j;
  j["scenario"] = name;
  j["completed"] = result.ok();
  j["steps"] = m.steps;
  j["duration_s"] = m.duration;
  j["safety_limit_m"] = m.safety_limit;
  for (std::size_t a = 0; a < kAxes; ++a)
  {
    const std::string s = std::string("_") + kAxisName[a];
    j["max_abs_delta1" + s + "_m"] = m.max_abs_delta1[a];
    j["max_abs_delta_m1" + s + "_m"] = m.max_abs_delta_m1[a];
    j["safety_violations" + s] = m.safety_violations[a];
    j["switch_count" + s] = m.switch_count[a];
    j["final_mrac_error" + s] = m.final_mrac_error[a];
  }
  j["final_tracking_error_m"] = m.final_tracking_error;
  j["max_tracking_error_m"] = m.max_tracking_error;
  j["max_abs_torque_nm"] = m.max_torque;
  j["max_inverse_inertia_norm"] = m.max_inverse_inertia_norm;
  j["min_abs_det_j"] = m.min_abs_det_j;

  const AuditReport& a = m.audit;
  json audit;
  audit["passed"] = a.passed();
  audit["lyapunov_enabled"] = a.toggles.lyapunov;
  audit["max_lyapunov_increase"] = a.max_lyapunov_increase;
  audit["lyapunov_violations"] = a.lyapunov_violations;
  audit["skew_symmetry_enabled"] = a.toggles.skew_symmetry;
  audit["max_skew_residual"] = a.max_skew_residual;
  audit["skew_violations"] = a.skew_violations;
  audit["partition_enabled"] = a.toggles.partition;
  audit["partition_violations"] = a.partition_violations;
  audit["linearization_enabled"] = a.toggles.linearization;
  audit["max_linearization_residual"] = a.max_linearization_residual;
  audit["linearization_violations"] = a.linearization_violations;
  j["audit"] = audit;

  if (result.certificate)
  {
    j["lyapunov_p"] = json::array({json::array({result.certificate->P(0, 0), result.certificate->P(0, 1)}),
                                   json::array({result.certificate->P(1, 0), result.certificate->P(1, 1)})});
    j["cqlf_margins"] = result.certificate->margins;
  }
  if (result.abort)
  {
    json ab;
    ab["error"] = std::string(to_string(result.abort->kind));
    ab["step"] = result.abort->step;
    ab["t_s"] = result.abort->t;
    ab["detail"] = result.abort->detail;
    j["abort"] = ab;
  }
  return j;
}

void flatten(const json& j, const std::string& prefix, std::ostringstream& out)
{
  for (auto it = j.begin(); it != j.end(); ++it)
  {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten(*it, key, out);
    else if (it->is_string())
      out << key << ": " << it->get<std::string>() << '\n';
    else
      out << key << ": " << it->dump() << '\n';
  }
}

}  // namespace

std::string metrics_json(const ScenarioResult& result, const std::string& scenario_name)
{
  return metrics_object(result, scenario_name).dump(2) + "\n";
}

std::string metrics_text(const ScenarioResult& result, const std::string& scenario_name)
{
  std::ostringstream out;
  flatten(metrics_object(result, scenario_name), "", out);
  return out.str();
}

void write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw AdmitError(ErrorKind::io_error, "cannot create " + dir.string() + ": " + ec.message());

  write_trace_csv(dir / config.output.trace_csv, result.trace);
  {
    auto out = open_out(dir / config.output.metrics_json);
    out << metrics_json(result, config.name);
  }
  {
    auto out = open_out(dir / config.output.metrics_text);
    out << metrics_text(result, config.name);
  }
  {
    auto out = open_out(dir / config.output.certificate);
    if (result.certificate)
      out << format_certificate(*result.certificate);
    else if (result.abort)
      out << result.abort->detail << '\n';
  }
}

}  // namespace admit
