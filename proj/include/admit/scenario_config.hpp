#pragma once

#include "admit/admittance_mrac.hpp"
#include "admit/linalg.hpp"
#include "admit/manipulator.hpp"
#include "admit/switched_reference.hpp"
#include "admit/tracking.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace admit {

/// Highest admissible sinusoid frequency, 1.2 Hz.
inline constexpr double kMaxForceFrequency = 7.54;  // rad/s

struct ForceSegment
{
  double t_start = 0.0;  // s
  Vec2 force = Vec2::Zero();
};

/// Scripted external force on the end-effector, per Cartesian axis.
struct ForceProfile
{
  enum class Kind
  {
    sinusoid,   // amplitude * sin(frequency t + phase)
    constant,   // amplitude
    piecewise,  // last segment with t_start <= t
    external,   // supplied at run time; zero in batch runs
  };

  Kind kind = Kind::sinusoid;
  Vec2 amplitude = Vec2(7.5, 7.5);
  Vec2 frequency = Vec2(0.5, 0.5);
  Vec2 phase = Vec2(0.0, 1.5707963267948966);
  std::vector<ForceSegment> segments;

  /// Unclamped force at time t.
  Vec2 value(double t) const;
};

/// Component-wise clamp to [-f_max, f_max], so sup ||F||_inf <= f_max.
Vec2 clamp_force(const Vec2& force, double f_max);

struct PartitionSpec
{
  enum class Kind
  {
    symmetric_threshold,  // |dm1| <= limit (1 - tolerance) -> subsystem 1, else 2
    whole_space,          // single subsystem, no switching
    explicit_cells,
  };
  Kind kind = Kind::symmetric_threshold;
  double tolerance_fraction = kDefaultToleranceFraction;
  std::vector<Polyhedron> cells;  // explicit_cells only
};

struct AuditToggles
{
  bool lyapunov = true;
  bool skew_symmetry = true;
  bool partition = true;
  bool linearization = true;
  double lyapunov_tol = 1e-6;
  double skew_tol = 1e-6;
  double linearization_tol = 1e-6;
};

struct OutputPaths
{
  std::string trace_csv = "trace.csv";
  std::string metrics_json = "metrics.json";
  std::string metrics_text = "metrics.txt";
  std::string certificate = "certificate.txt";
};

struct LiveOptions
{
  std::size_t snapshot_decimation = 20;
  double time_scale = 1.0;  // 0 runs unpaced
  std::size_t trace_capacity_steps = 600000;
};

struct ScenarioConfig
{
  int schema_version = 1;
  std::string name = "paper_scenario";

  TwoLinkParams manipulator;
  Vec2 q0 = Vec2::Zero();
  Vec2 qdot0 = Vec2::Zero();

  Mat2 plant_a = (Mat2() << 0.0, 1.0, 0.0, 0.0).finished();
  double virtual_mass = 1.0;
  std::vector<Mat2> subsystems;
  PartitionSpec partition;
  double safety_limit = kDefaultSafetyLimit;
  std::vector<Vec2> gamma_diagonals;
  std::vector<Row2> k_x0;  // empty: first subsystem's nominal gains everywhere; one row: every region
  double f_max = 20.0;
  SwitchSource switch_source = SwitchSource::reference;
  bool adaptation_enabled = true;

  std::optional<Mat2> lyapunov_p;  // searched when absent
  int cqlf_max_iter = 500;

  PdGains tracking;
  ForceProfile force;

  double dt = 1e-3;
  double duration = 60.0;
  double singularity_eps = kSingularityEpsilon;

  AuditToggles audit;
  OutputPaths output;
  LiveOptions live;

  double switching_threshold() const { return safety_limit * (1.0 - partition.tolerance_fraction); }

  /// Throws AdmitError(invalid_config | not_hurwitz) naming the offending field.
  void validate() const;

  ReferenceModel build_reference() const;

  /// Channel configuration for one axis with the given common Lyapunov matrix.
  ChannelConfig channel_config(const Mat2& P) const;

  std::size_t step_count() const;
};

/// Built-in default scenario: 60 s, dt 1 ms,
/// F = [7.5 sin 0.5t; 7.5 cos 0.5t], horizontal-plane arm about
/// q0 = [pi/12, 5 pi/6].
ScenarioConfig paper_scenario();

/// JSON text with unit-suffixed keys. Missing keys keep their defaults.
/// Throws AdmitError(parse_error) with line/column, or (invalid_config) with the field path.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical JSON; serialize(parse(serialize(c))) == serialize(c).
std::string serialize_config(const ScenarioConfig& config);

/// Applies "dotted.path=value" overrides. Path segments may omit unit
/// suffixes when unambiguous (force.amplitude -> force.amplitude_n); a
/// non-null scalar assigned to an array field is broadcast to every element.
ScenarioConfig apply_overrides(const ScenarioConfig& config, const std::vector<std::string>& overrides);

}  // namespace admit
