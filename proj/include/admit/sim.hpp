#pragma once

#include "admit/admittance_mrac.hpp"
#include "admit/cqlf.hpp"
#include "admit/error.hpp"
#include "admit/manipulator.hpp"
#include "admit/scenario_config.hpp"
#include "admit/tracking.hpp"

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace admit {

inline constexpr std::size_t kAxes = 2;

struct AxisRecord
{
  Vec2 delta = Vec2::Zero();
  Vec2 delta_m = Vec2::Zero();
  std::size_t region = 0;  // zero-based subsystem index
  std::vector<Row2> k_x;   // every region's gain row
  double lyapunov = 0.0;
};

/// State at t_k together with the inputs applied over [t_k, t_k + dt).
struct TraceRecord
{
  std::size_t step = 0;
  double t = 0.0;
  Vec2 q = Vec2::Zero();
  Vec2 qdot = Vec2::Zero();
  Vec2 x_dev = Vec2::Zero();  // end-effector minus operating point
  Vec2 xdot = Vec2::Zero();
  std::array<AxisRecord, kAxes> axes;
  Vec2 f_ext = Vec2::Zero();   // clamped
  Vec2 force = Vec2::Zero();   // commanded Cartesian force
  Vec2 torque = Vec2::Zero();  // commanded joint torque
  double det_j = 0.0;
};

struct SimTrace
{
  double dt = 0.0;
  std::size_t regions = 0;
  std::vector<TraceRecord> rows;
};

struct AuditReport
{
  AuditToggles toggles;
  double max_lyapunov_increase = 0.0;
  std::size_t lyapunov_violations = 0;
  double max_skew_residual = 0.0;
  std::size_t skew_violations = 0;
  std::size_t partition_violations = 0;
  double max_linearization_residual = 0.0;
  std::size_t linearization_violations = 0;

  bool passed() const
  {
    return lyapunov_violations == 0 && skew_violations == 0 && partition_violations == 0 &&
           linearization_violations == 0;
  }
};

struct RunMetrics
{
  std::array<double, kAxes> max_abs_delta1{};
  std::array<double, kAxes> max_abs_delta_m1{};
  std::array<std::size_t, kAxes> safety_violations{};
  std::array<std::size_t, kAxes> switch_count{};
  std::array<double, kAxes> final_mrac_error{};
  double final_tracking_error = 0.0;
  double max_tracking_error = 0.0;
  double max_torque = 0.0;
  double max_inverse_inertia_norm = 0.0;
  double min_abs_det_j = 0.0;
  double safety_limit = 0.0;
  std::size_t steps = 0;
  double duration = 0.0;
  AuditReport audit;
};

struct SimAbort
{
  ErrorKind kind = ErrorKind::invalid_config;
  std::size_t step = 0;
  double t = 0.0;
  std::string detail;
};

struct ScenarioResult
{
  SimTrace trace;
  RunMetrics metrics;
  std::optional<CqlfCertificate> certificate;
  std::optional<SimAbort> abort;

  bool ok() const { return !abort.has_value(); }
};

/// Certificate for the configured reference family: verifies the supplied P,
/// or searches when none is given. Throws AdmitError(no_cqlf) on failure.
CqlfCertificate certify_config(const ScenarioConfig& config);

/// Owns all mutable simulation state: two admittance channels, the tracking
/// controller and the arm. Single caller at a time.
class Simulation
{
 public:
  /// Validates the config and refuses to construct without a CQLF certificate.
  explicit Simulation(ScenarioConfig config);

  /// Record for the current state under `raw_force` (clamped), then one dt.
  TraceRecord step(const Vec2& raw_force);

  /// Record for the current state without advancing.
  TraceRecord observe(const Vec2& raw_force) const;

  void reset();

  std::size_t step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) * config_.dt; }
  const ScenarioConfig& config() const { return config_; }
  const CqlfCertificate& certificate() const { return certificate_; }
  const Vec2& operating_point() const { return x_op_; }
  const JointState& joint_state() const { return joint_; }
  const AdmittanceChannel& channel(std::size_t axis) const { return channels_.at(axis); }

 private:
  ScenarioConfig config_;
  CqlfCertificate certificate_;
  Vec2 x_op_ = Vec2::Zero();
  JointState joint_;
  std::vector<AdmittanceChannel> channels_;
  std::size_t step_ = 0;
};

/// Batch run over config.duration. Simulation errors abort with the step
/// index and the partial trace; a missing certificate aborts at step 0.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// Metrics derived from a trace; audits are run per the config toggles.
RunMetrics compute_metrics(const SimTrace& trace, const ScenarioConfig& config, const CqlfCertificate& certificate);

struct LyapunovAudit
{
  double max_increase = 0.0;  // largest V(k+1) - V(k) over both axes
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation_step;
  std::array<double, kAxes> initial_value{};
  std::array<double, kAxes> final_value{};
};

/// Recomputes V per axis from the trace's errors and gain rows and checks
/// the per-step increase against `tol`. Never mutates the trace.
LyapunovAudit run_lyapunov_audit(const SimTrace& trace, const CqlfCertificate& certificate,
                                 const std::vector<Row2>& nominal_gains, const std::vector<Mat2>& gamma, double tol);

AuditReport run_audits(const SimTrace& trace, const ScenarioConfig& config, const CqlfCertificate& certificate);

/// ẋᵀ(Ṁ_x − 2C_x)ẋ, with Ṁ_x assembled from J̇ and a central difference (step h) of the joint inertia.
double skew_symmetry_residual(const TwoLinkParams& params, const JointState& state, double h = 1e-6);

/// Everything a live client renders for one step.
struct StateSnapshot
{
  TraceRecord record;
  Vec2 x_base = Vec2::Zero();
  Vec2 operating_point = Vec2::Zero();
  bool safety_flag = false;  // some axis is in a stiff (non-first) region
  std::array<bool, kAxes> limit_exceeded{};
  double session_time = 0.0;  // monotone across resets
  std::size_t epoch = 0;      // number of resets so far
};

/// Interactive session: user forces replace the scripted profile. Keeps a
/// bounded full-rate trace for post-session export.
class RealtimeSession
{
 public:
  explicit RealtimeSession(ScenarioConfig config);

  const Simulation& simulation() const { return sim_; }
  const SimTrace& trace() const { return trace_; }
  double session_time() const { return time_offset_ + sim_.time(); }
  std::size_t epoch() const { return epoch_; }

  StateSnapshot snapshot_of(const TraceRecord& record) const;

  /// Re-initializes state and gains; the full-rate trace is kept.
  void reset();

  /// Replaces the configuration (re-certifies) and resets. The trace is dropped
  /// when dt or the region count changes.
  void reconfigure(ScenarioConfig config);

 private:
  friend StateSnapshot step_realtime(RealtimeSession& session, const Vec2& user_force, double dt);

  Simulation sim_;
  SimTrace trace_;
  std::size_t capacity_;
  double time_offset_ = 0.0;
  std::size_t epoch_ = 0;
};

/// Advances exactly one dt with the clamped user force. `dt` must equal the
/// session's configured step. Throws AdmitError on simulation aborts.
StateSnapshot step_realtime(RealtimeSession& session, const Vec2& user_force, double dt);

}  // namespace admit
