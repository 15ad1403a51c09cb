#include "admit/scenario_config.hpp"

#include "admit/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace admit {

using json = nlohmann::ordered_json;

Vec2 ForceProfile::value(double t) const
{
  switch (kind)
  {
    case Kind::sinusoid:
      return {amplitude(0) * std::sin(frequency(0) * t + phase(0)),
              amplitude(1) * std::sin(frequency(1) * t + phase(1))};
    case Kind::constant:
      return amplitude;
    case Kind::piecewise:
    {
      Vec2 f = Vec2::Zero();
      for (const auto& seg : segments)
      {
        if (seg.t_start <= t)
          f = seg.force;
        else
          break;
      }
      return f;
    }
    case Kind::external:
      return Vec2::Zero();
  }
  return Vec2::Zero();
}

Vec2 clamp_force(const Vec2& force, double f_max)
{
  return {std::clamp(force(0), -f_max, f_max), std::clamp(force(1), -f_max, f_max)};
}

// ---------------------------------------------------------------------------
// Validation

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& message)
{
  throw AdmitError(ErrorKind::invalid_config, field + ": " + message);
}

std::string indexed(const std::string& base, std::size_t i)
{
  return base + "[" + std::to_string(i) + "]";
}

}  // namespace

void ScenarioConfig::validate() const
{
  if (schema_version != 1) invalid("schema_version", "unsupported version " + std::to_string(schema_version));
  manipulator.validate();
  if (!q0.allFinite()) invalid("manipulator.q0_rad", "must be finite");
  if (!qdot0.allFinite()) invalid("manipulator.qdot0_radps", "must be finite");
  if (!(singularity_eps > 0.0)) invalid("manipulator.singularity_eps", "must be positive");
  if (singularity_check(jacobian(manipulator, q0), singularity_eps) == SingularityStatus::singular)
    invalid("manipulator.q0_rad", "initial configuration is singular");

  if (!plant_a.allFinite()) invalid("admittance.plant_a", "must be finite");
  if (!(virtual_mass > 0.0) || !std::isfinite(virtual_mass)) invalid("admittance.virtual_mass_kg", "must be positive");
  if (subsystems.empty()) invalid("admittance.subsystems", "at least one subsystem required");
  const Vec2 B(0.0, 1.0 / virtual_mass);
  for (std::size_t i = 0; i < subsystems.size(); ++i)
  {
    const std::string field = indexed("admittance.subsystems", i) + ".a_m";
    if (!is_hurwitz(subsystems[i]))
      throw AdmitError(ErrorKind::not_hurwitz, field + ": reference matrix is not Hurwitz");
    try
    {
      (void)nominal_gains(plant_a, B, subsystems[i]);
    }
    catch (const AdmitError& e)
    {
      throw AdmitError(e.kind(), field + ": " + e.what());
    }
  }

  switch (partition.kind)
  {
    case PartitionSpec::Kind::symmetric_threshold:
      if (subsystems.size() != 2) invalid("admittance.partition", "symmetric_threshold needs exactly 2 subsystems");
      if (!(partition.tolerance_fraction >= 0.0 && partition.tolerance_fraction < 1.0))
        invalid("admittance.partition.tolerance_fraction", "must lie in [0, 1)");
      break;
    case PartitionSpec::Kind::whole_space:
      if (subsystems.size() != 1) invalid("admittance.partition", "whole_space needs exactly 1 subsystem");
      break;
    case PartitionSpec::Kind::explicit_cells:
      if (partition.cells.empty()) invalid("admittance.partition.regions", "at least one region required");
      for (std::size_t i = 0; i < partition.cells.size(); ++i)
        if (partition.cells[i].subsystem >= subsystems.size())
          invalid(indexed("admittance.partition.regions", i) + ".subsystem", "index out of range");
      break;
  }
  if (!(safety_limit > 0.0)) invalid("admittance.safety_limit_m", "must be positive");

  if (gamma_diagonals.size() != subsystems.size())
    invalid("admittance.gamma_diag", "one diagonal per subsystem required");
  for (std::size_t i = 0; i < gamma_diagonals.size(); ++i)
    if (!(gamma_diagonals[i](0) > 0.0 && gamma_diagonals[i](1) > 0.0) || !gamma_diagonals[i].allFinite())
      invalid(indexed("admittance.gamma_diag", i), "entries must be strictly positive");
  if (!k_x0.empty() && k_x0.size() != 1 && k_x0.size() != subsystems.size())
    invalid("admittance.k_x0", "give one row or one row per subsystem");
  for (std::size_t i = 0; i < k_x0.size(); ++i)
    if (!k_x0[i].allFinite()) invalid(indexed("admittance.k_x0", i), "must be finite");
  if (!(f_max > 0.0) || !std::isfinite(f_max)) invalid("admittance.f_max_n", "must be positive");

  if (lyapunov_p)
  {
    if (!lyapunov_p->allFinite() || std::abs((*lyapunov_p)(0, 1) - (*lyapunov_p)(1, 0)) > 1e-12)
      invalid("lyapunov.p", "must be a finite symmetric matrix");
  }
  if (cqlf_max_iter < 1) invalid("lyapunov.search_max_iter", "must be >= 1");

  tracking.validate();

  if (!force.amplitude.allFinite()) invalid("force.amplitude_n", "must be finite");
  if (force.kind == ForceProfile::Kind::sinusoid)
  {
    for (int a = 0; a < 2; ++a)
      if (!(force.frequency(a) >= 0.0 && force.frequency(a) <= kMaxForceFrequency))
        invalid("force.frequency_radps", "must lie in [0, 7.54] rad/s (1.2 Hz)");
    if (!force.phase.allFinite()) invalid("force.phase_rad", "must be finite");
  }
  if (force.kind == ForceProfile::Kind::piecewise)
  {
    if (force.segments.empty()) invalid("force.segments", "piecewise profile needs at least one segment");
    for (std::size_t i = 0; i < force.segments.size(); ++i)
    {
      if (!force.segments[i].force.allFinite()) invalid(indexed("force.segments", i) + ".force_n", "must be finite");
      if (i > 0 && !(force.segments[i].t_start > force.segments[i - 1].t_start))
        invalid(indexed("force.segments", i) + ".t_start_s", "segments must be strictly increasing in time");
    }
  }

  if (!(dt > 0.0) || !std::isfinite(dt)) invalid("sim.dt_s", "must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration)) invalid("sim.duration_s", "must be >= 0");
  if (std::abs(duration / dt - std::round(duration / dt)) > 1e-6)
    invalid("sim.duration_s", "must be an integer multiple of dt_s");

  if (live.snapshot_decimation < 1) invalid("live.snapshot_decimation", "must be >= 1");
  if (!(live.time_scale >= 0.0)) invalid("live.time_scale", "must be >= 0");
}

ReferenceModel ScenarioConfig::build_reference() const
{
  const Vec2 B(0.0, 1.0 / virtual_mass);
  ReferenceModel model;
  for (const auto& a : subsystems) model.subsystems.emplace_back(a, B);
  switch (partition.kind)
  {
    case PartitionSpec::Kind::symmetric_threshold:
      model.partition = Partition::symmetric_threshold(switching_threshold());
      break;
    case PartitionSpec::Kind::whole_space:
      model.partition = Partition::whole_space();
      break;
    case PartitionSpec::Kind::explicit_cells:
      model.partition = Partition(partition.cells, subsystems.size());
      break;
  }
  return model;
}

ChannelConfig ScenarioConfig::channel_config(const Mat2& P) const
{
  ChannelConfig c;
  c.plant_a = plant_a;
  c.virtual_mass = virtual_mass;
  c.reference = build_reference();
  c.gamma_diagonals = gamma_diagonals;
  if (k_x0.empty())
    c.k_x0 = {nominal_gains(plant_a, Vec2(0.0, 1.0 / virtual_mass), subsystems.front())};
  else
    c.k_x0 = k_x0;
  c.f_max = f_max;
  c.P = P;
  c.switch_source = switch_source;
  c.adaptation_enabled = adaptation_enabled;
  return c;
}

std::size_t ScenarioConfig::step_count() const
{
  return static_cast<std::size_t>(std::llround(duration / dt));
}

ScenarioConfig paper_scenario()
{
  ScenarioConfig c;
  c.name = "paper_scenario";
  c.manipulator.gravity_enabled = false;
  c.q0 = Vec2(std::numbers::pi / 12.0, 5.0 * std::numbers::pi / 6.0);
  Mat2 a1;
  a1 << 0.0, 1.0, -5.0, -9.0;
  Mat2 a2;
  a2 << 0.0, 1.0, -20.0, -25.0;
  c.subsystems = {a1, a2};
  c.gamma_diagonals = {Vec2(200.0, 200.0), Vec2(1000.0, 1000.0)};
  c.lyapunov_p = (Mat2() << 8.16, 2.22, 2.22, 3.90).finished();
  return c;
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

json to_json(const Vec2& v)
{
  return json::array({v(0), v(1)});
}
json to_json(const Row2& v)
{
  return json::array({v(0), v(1)});
}
json to_json(const Mat2& m)
{
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

const char* to_string(ForceProfile::Kind k)
{
  switch (k)
  {
    case ForceProfile::Kind::sinusoid:
      return "sinusoid";
    case ForceProfile::Kind::constant:
      return "constant";
    case ForceProfile::Kind::piecewise:
      return "piecewise";
    case ForceProfile::Kind::external:
      return "external";
  }
  return "sinusoid";
}

const char* to_string(PartitionSpec::Kind k)
{
  switch (k)
  {
    case PartitionSpec::Kind::symmetric_threshold:
      return "symmetric_threshold";
    case PartitionSpec::Kind::whole_space:
      return "whole_space";
    case PartitionSpec::Kind::explicit_cells:
      return "explicit";
  }
  return "symmetric_threshold";
}

json config_to_json(const ScenarioConfig& c)
{
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;

  json& m = j["manipulator"];
  m["m1_kg"] = c.manipulator.m1;
  m["m2_kg"] = c.manipulator.m2;
  m["l1_m"] = c.manipulator.l1;
  m["l2_m"] = c.manipulator.l2;
  m["g_mps2"] = c.manipulator.g;
  m["gravity_enabled"] = c.manipulator.gravity_enabled;
  m["q0_rad"] = to_json(c.q0);
  m["qdot0_radps"] = to_json(c.qdot0);
  m["singularity_eps"] = c.singularity_eps;

  json& a = j["admittance"];
  a["plant_a"] = to_json(c.plant_a);
  a["virtual_mass_kg"] = c.virtual_mass;
  a["subsystems"] = json::array();
  for (const auto& s : c.subsystems) a["subsystems"].push_back(json{{"a_m", to_json(s)}});
  json& p = a["partition"];
  p["kind"] = to_string(c.partition.kind);
  p["tolerance_fraction"] = c.partition.tolerance_fraction;
  if (c.partition.kind == PartitionSpec::Kind::explicit_cells)
  {
    p["regions"] = json::array();
    for (const auto& cell : c.partition.cells)
    {
      json rows = json::array();
      for (const auto& r : cell.rows)
        rows.push_back(json{{"h", json::array({r.h(0), r.h(1), r.h(2)})}, {"strict", r.strict}});
      p["regions"].push_back(json{{"subsystem", cell.subsystem + 1}, {"rows", rows}});
    }
  }
  a["safety_limit_m"] = c.safety_limit;
  a["gamma_diag"] = json::array();
  for (const auto& g : c.gamma_diagonals) a["gamma_diag"].push_back(to_json(g));
  if (c.k_x0.empty())
  {
    a["k_x0"] = nullptr;
  }
  else if (c.k_x0.size() == 1)
  {
    a["k_x0"] = to_json(c.k_x0.front());
  }
  else
  {
    json rows = json::array();
    for (const auto& k : c.k_x0) rows.push_back(to_json(k));
    a["k_x0"] = rows;
  }
  a["f_max_n"] = c.f_max;
  a["switch_on"] = c.switch_source == SwitchSource::reference ? "reference" : "plant";
  a["adaptation_enabled"] = c.adaptation_enabled;

  json& l = j["lyapunov"];
  l["p"] = c.lyapunov_p ? to_json(*c.lyapunov_p) : json(nullptr);
  l["search_max_iter"] = c.cqlf_max_iter;

  json& t = j["tracking"];
  t["kp_per_s2"] = to_json(c.tracking.kp);
  t["kd_per_s"] = to_json(c.tracking.kd);

  json& f = j["force"];
  f["kind"] = to_string(c.force.kind);
  f["amplitude_n"] = to_json(c.force.amplitude);
  f["frequency_radps"] = to_json(c.force.frequency);
  f["phase_rad"] = to_json(c.force.phase);
  f["segments"] = json::array();
  for (const auto& s : c.force.segments)
    f["segments"].push_back(json{{"t_start_s", s.t_start}, {"force_n", to_json(s.force)}});

  json& s = j["sim"];
  s["dt_s"] = c.dt;
  s["duration_s"] = c.duration;

  json& au = j["audit"];
  au["lyapunov"] = c.audit.lyapunov;
  au["skew_symmetry"] = c.audit.skew_symmetry;
  au["partition"] = c.audit.partition;
  au["linearization"] = c.audit.linearization;
  au["lyapunov_tol"] = c.audit.lyapunov_tol;
  au["skew_tol"] = c.audit.skew_tol;
  au["linearization_tol"] = c.audit.linearization_tol;

  json& o = j["output"];
  o["trace_csv"] = c.output.trace_csv;
  o["metrics_json"] = c.output.metrics_json;
  o["metrics_text"] = c.output.metrics_text;
  o["certificate"] = c.output.certificate;

  json& lv = j["live"];
  lv["snapshot_decimation"] = c.live.snapshot_decimation;
  lv["time_scale"] = c.live.time_scale;
  lv["trace_capacity_steps"] = c.live.trace_capacity_steps;
  return j;
}

// Reads fields of one JSON object, tracking the dotted path for diagnostics
// and rejecting keys it was never asked about.
class ObjectReader
{
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
  {
    if (!obj_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  ~ObjectReader() = default;

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key)
  {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out)
  {
    if (const json* v = find(key))
    {
      try
      {
        out = v->get<T>();
      }
      catch (const json::exception&)
      {
        invalid(field(key), "wrong type");
      }
    }
  }

  void read_number(const std::string& key, double& out)
  {
    if (const json* v = find(key))
    {
      if (!v->is_number()) invalid(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  void read_vec2(const std::string& key, Vec2& out)
  {
    if (const json* v = find(key)) out = parse_vec2(*v, field(key));
  }

  void read_mat2(const std::string& key, Mat2& out)
  {
    if (const json* v = find(key)) out = parse_mat2(*v, field(key));
  }

  void finish() const
  {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) invalid(field(it.key()), "unknown key");
  }

  static Vec2 parse_vec2(const json& v, const std::string& f)
  {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      invalid(f, "expected an array of 2 numbers");
    return {v[0].get<double>(), v[1].get<double>()};
  }

  static Mat2 parse_mat2(const json& v, const std::string& f)
  {
    if (!v.is_array() || v.size() != 2) invalid(f, "expected a 2x2 matrix [[a, b], [c, d]]");
    Mat2 m;
    for (int r = 0; r < 2; ++r)
    {
      const Vec2 row = parse_vec2(v[static_cast<std::size_t>(r)], f + "[" + std::to_string(r) + "]");
      m.row(r) = row.transpose();
    }
    return m;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

ScenarioConfig config_from_json(const json& j)
{
  ScenarioConfig c = paper_scenario();
  ObjectReader root(j, "");
  root.read("schema_version", c.schema_version);
  root.read("name", c.name);

  if (const json* v = root.find("manipulator"))
  {
    ObjectReader r(*v, "manipulator");
    r.read_number("m1_kg", c.manipulator.m1);
    r.read_number("m2_kg", c.manipulator.m2);
    r.read_number("l1_m", c.manipulator.l1);
    r.read_number("l2_m", c.manipulator.l2);
    r.read_number("g_mps2", c.manipulator.g);
    r.read("gravity_enabled", c.manipulator.gravity_enabled);
    r.read_vec2("q0_rad", c.q0);
    r.read_vec2("qdot0_radps", c.qdot0);
    r.read_number("singularity_eps", c.singularity_eps);
    r.finish();
  }

  if (const json* v = root.find("admittance"))
  {
    ObjectReader r(*v, "admittance");
    r.read_mat2("plant_a", c.plant_a);
    r.read_number("virtual_mass_kg", c.virtual_mass);
    if (const json* subs = r.find("subsystems"))
    {
      if (!subs->is_array()) invalid("admittance.subsystems", "expected an array");
      c.subsystems.clear();
      for (std::size_t i = 0; i < subs->size(); ++i)
      {
        ObjectReader sr((*subs)[i], indexed("admittance.subsystems", i));
        Mat2 a = Mat2::Zero();
        if (!sr.find("a_m")) invalid(sr.field("a_m"), "required");
        sr.read_mat2("a_m", a);
        sr.finish();
        c.subsystems.push_back(a);
      }
    }
    if (const json* part = r.find("partition"))
    {
      ObjectReader pr(*part, "admittance.partition");
      std::string kind = to_string(c.partition.kind);
      pr.read("kind", kind);
      if (kind == "symmetric_threshold")
        c.partition.kind = PartitionSpec::Kind::symmetric_threshold;
      else if (kind == "whole_space")
        c.partition.kind = PartitionSpec::Kind::whole_space;
      else if (kind == "explicit")
        c.partition.kind = PartitionSpec::Kind::explicit_cells;
      else
        invalid("admittance.partition.kind", "expected symmetric_threshold, whole_space or explicit");
      pr.read_number("tolerance_fraction", c.partition.tolerance_fraction);
      c.partition.cells.clear();
      if (const json* regions = pr.find("regions"))
      {
        if (!regions->is_array()) invalid("admittance.partition.regions", "expected an array");
        for (std::size_t i = 0; i < regions->size(); ++i)
        {
          const std::string rf = indexed("admittance.partition.regions", i);
          ObjectReader cr((*regions)[i], rf);
          Polyhedron cell;
          int label = 0;
          cr.read("subsystem", label);
          if (label < 1) invalid(rf + ".subsystem", "1-based subsystem label required");
          cell.subsystem = static_cast<std::size_t>(label - 1);
          if (const json* rows = cr.find("rows"))
          {
            if (!rows->is_array()) invalid(rf + ".rows", "expected an array");
            for (std::size_t k = 0; k < rows->size(); ++k)
            {
              ObjectReader hr((*rows)[k], indexed(rf + ".rows", k));
              const json* h = hr.find("h");
              if (!h || !h->is_array() || h->size() != 3) invalid(hr.field("h"), "expected an array of 3 numbers");
              HalfSpace hs;
              for (std::size_t e = 0; e < 3; ++e)
              {
                if (!(*h)[e].is_number()) invalid(hr.field("h"), "expected numbers");
                hs.h(static_cast<Eigen::Index>(e)) = (*h)[e].get<double>();
              }
              hr.read("strict", hs.strict);
              hr.finish();
              cell.rows.push_back(hs);
            }
          }
          cr.finish();
          c.partition.cells.push_back(cell);
        }
      }
      pr.finish();
    }
    r.read_number("safety_limit_m", c.safety_limit);
    if (const json* g = r.find("gamma_diag"))
    {
      if (!g->is_array()) invalid("admittance.gamma_diag", "expected an array of [g1, g2] pairs");
      c.gamma_diagonals.clear();
      for (std::size_t i = 0; i < g->size(); ++i)
        c.gamma_diagonals.push_back(ObjectReader::parse_vec2((*g)[i], indexed("admittance.gamma_diag", i)));
    }
    if (const json* k = r.find("k_x0"))
    {
      c.k_x0.clear();
      if (k->is_string() && k->get<std::string>() == "nominal")
      {
        // expanded here, so it follows the subsystems given above it
        for (const auto& a_m : c.subsystems)
          c.k_x0.push_back(nominal_gains(c.plant_a, Vec2(0.0, 1.0 / c.virtual_mass), a_m));
      }
      else if (k->is_array() && !k->empty() && (*k)[0].is_array())
      {
        for (std::size_t i = 0; i < k->size(); ++i)
          c.k_x0.push_back(ObjectReader::parse_vec2((*k)[i], indexed("admittance.k_x0", i)).transpose());
      }
      else if (!k->is_null())
      {
        if (!k->is_array()) invalid("admittance.k_x0", "expected null, \"nominal\", [k1, k2] or one row per subsystem");
        c.k_x0.push_back(ObjectReader::parse_vec2(*k, "admittance.k_x0").transpose());
      }
    }
    r.read_number("f_max_n", c.f_max);
    std::string sw = c.switch_source == SwitchSource::reference ? "reference" : "plant";
    r.read("switch_on", sw);
    if (sw == "reference")
      c.switch_source = SwitchSource::reference;
    else if (sw == "plant")
      c.switch_source = SwitchSource::plant;
    else
      invalid("admittance.switch_on", "expected reference or plant");
    r.read("adaptation_enabled", c.adaptation_enabled);
    r.finish();
  }

  if (const json* v = root.find("lyapunov"))
  {
    ObjectReader r(*v, "lyapunov");
    if (const json* p = r.find("p"))
    {
      if (p->is_null())
        c.lyapunov_p.reset();
      else
        c.lyapunov_p = ObjectReader::parse_mat2(*p, "lyapunov.p");
    }
    r.read("search_max_iter", c.cqlf_max_iter);
    r.finish();
  }

  if (const json* v = root.find("tracking"))
  {
    ObjectReader r(*v, "tracking");
    r.read_mat2("kp_per_s2", c.tracking.kp);
    r.read_mat2("kd_per_s", c.tracking.kd);
    r.finish();
  }

  if (const json* v = root.find("force"))
  {
    ObjectReader r(*v, "force");
    std::string kind = to_string(c.force.kind);
    r.read("kind", kind);
    if (kind == "sinusoid")
      c.force.kind = ForceProfile::Kind::sinusoid;
    else if (kind == "constant")
      c.force.kind = ForceProfile::Kind::constant;
    else if (kind == "piecewise")
      c.force.kind = ForceProfile::Kind::piecewise;
    else if (kind == "external")
      c.force.kind = ForceProfile::Kind::external;
    else
      invalid("force.kind", "expected sinusoid, constant, piecewise or external");
    r.read_vec2("amplitude_n", c.force.amplitude);
    r.read_vec2("frequency_radps", c.force.frequency);
    r.read_vec2("phase_rad", c.force.phase);
    if (const json* segs = r.find("segments"))
    {
      if (!segs->is_array()) invalid("force.segments", "expected an array");
      c.force.segments.clear();
      for (std::size_t i = 0; i < segs->size(); ++i)
      {
        ObjectReader sr((*segs)[i], indexed("force.segments", i));
        ForceSegment seg;
        sr.read_number("t_start_s", seg.t_start);
        sr.read_vec2("force_n", seg.force);
        sr.finish();
        c.force.segments.push_back(seg);
      }
    }
    r.finish();
  }

  if (const json* v = root.find("sim"))
  {
    ObjectReader r(*v, "sim");
    r.read_number("dt_s", c.dt);
    r.read_number("duration_s", c.duration);
    r.finish();
  }

  if (const json* v = root.find("audit"))
  {
    ObjectReader r(*v, "audit");
    r.read("lyapunov", c.audit.lyapunov);
    r.read("skew_symmetry", c.audit.skew_symmetry);
    r.read("partition", c.audit.partition);
    r.read("linearization", c.audit.linearization);
    r.read_number("lyapunov_tol", c.audit.lyapunov_tol);
    r.read_number("skew_tol", c.audit.skew_tol);
    r.read_number("linearization_tol", c.audit.linearization_tol);
    r.finish();
  }

  if (const json* v = root.find("output"))
  {
    ObjectReader r(*v, "output");
    r.read("trace_csv", c.output.trace_csv);
    r.read("metrics_json", c.output.metrics_json);
    r.read("metrics_text", c.output.metrics_text);
    r.read("certificate", c.output.certificate);
    r.finish();
  }

  if (const json* v = root.find("live"))
  {
    ObjectReader r(*v, "live");
    r.read("snapshot_decimation", c.live.snapshot_decimation);
    r.read_number("time_scale", c.live.time_scale);
    r.read("trace_capacity_steps", c.live.trace_capacity_steps);
    r.finish();
  }

  root.finish();
  c.validate();
  return c;
}

json parse_json_text(const std::string& text)
{
  try
  {
    return json::parse(text);
  }
  catch (const json::parse_error& e)
  {
    // Translate the byte offset into line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
    {
      if (text[i] == '\n')
      {
        ++line;
        col = 1;
      }
      else
      {
        ++col;
      }
    }
    std::ostringstream os;
    os << "config parse error at line " << line << ", column " << col << ": " << e.what();
    throw AdmitError(ErrorKind::parse_error, os.str());
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text)
{
  return config_from_json(parse_json_text(text));
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw AdmitError(ErrorKind::io_error, "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try
  {
    return parse_config(buf.str());
  }
  catch (const AdmitError& e)
  {
    throw AdmitError(e.kind(), path.string() + ": " + e.what());
  }
}

namespace {

bool is_flat(const json& j)
{
  if (!j.is_array()) return j.is_primitive();
  for (const auto& e : j)
    if (!(e.is_primitive() ||
          (e.is_array() && std::all_of(e.begin(), e.end(), [](const json& x) { return x.is_primitive(); }))))
      return false;
  return true;
}

std::string inline_dump(const json& j)
{
  if (!j.is_array()) return j.dump();
  std::string out = "[";
  for (std::size_t i = 0; i < j.size(); ++i) out += (i ? ", " : "") + inline_dump(j[i]);
  return out + "]";
}

/// Like dump(2) but keeps numeric vectors and matrices on one line.
void write_pretty(const json& j, int indent, std::string& out)
{
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  if (is_flat(j))
  {
    out += inline_dump(j);
  }
  else if (j.is_object())
  {
    if (j.empty())
    {
      out += "{}";
      return;
    }
    out += "{\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i)
    {
      out += pad + json(it.key()).dump() + ": ";
      write_pretty(it.value(), indent + 2, out);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += std::string(static_cast<std::size_t>(indent), ' ') + "}";
  }
  else
  {
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i)
    {
      out += pad;
      write_pretty(j[i], indent + 2, out);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += std::string(static_cast<std::size_t>(indent), ' ') + "]";
  }
}

}  // namespace

std::string serialize_config(const ScenarioConfig& config)
{
  std::string out;
  write_pretty(config_to_json(config), 0, out);
  return out + "\n";
}

namespace {

json* resolve_segment(json& node, const std::string& seg, const std::string& full_path)
{
  if (node.is_object())
  {
    if (node.contains(seg)) return &node[seg];
    json* match = nullptr;
    for (auto it = node.begin(); it != node.end(); ++it)
    {
      if (it.key().rfind(seg + "_", 0) == 0)
      {
        if (match) invalid(full_path, "ambiguous override key segment '" + seg + "'");
        match = &it.value();
      }
    }
    if (!match) invalid(full_path, "unknown override key");
    return match;
  }
  if (node.is_array())
  {
    std::size_t idx = 0;
    try
    {
      std::size_t used = 0;
      idx = std::stoul(seg, &used);
      if (used != seg.size()) throw std::invalid_argument(seg);
    }
    catch (const std::exception&)
    {
      invalid(full_path, "array index expected at '" + seg + "'");
    }
    if (idx >= node.size()) invalid(full_path, "array index out of range");
    return &node[idx];
  }
  invalid(full_path, "cannot descend into a scalar");
}

void assign_broadcast(json& target, const json& value)
{
  if (target.is_array() && !value.is_array() && !value.is_object() && !value.is_null())
  {
    for (auto& e : target) assign_broadcast(e, value);
    return;
  }
  target = value;
}

}  // namespace

ScenarioConfig apply_overrides(const ScenarioConfig& config, const std::vector<std::string>& overrides)
{
  if (overrides.empty()) return config;
  json j = config_to_json(config);
  for (const auto& item : overrides)
  {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) invalid(item, "override must have the form key.path=value");
    const std::string path = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value;
    try
    {
      value = json::parse(raw);
    }
    catch (const json::parse_error&)
    {
      value = raw;  // bare strings such as kind=constant
    }
    json* node = &j;
    std::stringstream ss(path);
    std::string seg;
    while (std::getline(ss, seg, '.')) node = resolve_segment(*node, seg, path);
    assign_broadcast(*node, value);
  }
  return config_from_json(j);
}

}  // namespace admit
