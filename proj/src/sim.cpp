#include "admit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace admit {

CqlfCertificate certify_config(const ScenarioConfig& config)
{
  if (config.lyapunov_p)
  {
    auto verified = verify_cqlf(config.subsystems, *config.lyapunov_p);
    if (auto* rejection = std::get_if<CqlfRejection>(&verified))
      throw AdmitError(ErrorKind::no_cqlf, "supplied P rejected\n" + format_rejection(*rejection));
    return std::get<CqlfCertificate>(verified);
  }
  auto searched = search_cqlf(config.subsystems, config.cqlf_max_iter);
  if (auto* report = std::get_if<InfeasibleReport>(&searched))
    throw AdmitError(ErrorKind::no_cqlf, "no common Lyapunov matrix found\n" + format_infeasible(*report));
  return std::get<CqlfCertificate>(searched);
}

Simulation::Simulation(ScenarioConfig config) : config_(std::move(config))
{
  config_.validate();
  certificate_ = certify_config(config_);
  x_op_ = forward_kinematics(config_.manipulator, config_.q0);
  const ChannelConfig channel = config_.channel_config(certificate_.P);
  channels_.reserve(kAxes);
  for (std::size_t a = 0; a < kAxes; ++a) channels_.emplace_back(channel);
  joint_ = JointState{config_.q0, config_.qdot0};
}

TraceRecord Simulation::observe(const Vec2& raw_force) const
{
  const auto& params = config_.manipulator;
  TraceRecord rec;
  rec.step = step_;
  rec.t = time();
  rec.q = joint_.q;
  rec.qdot = joint_.qdot;
  rec.f_ext = clamp_force(raw_force, config_.f_max);

  const Mat2 J = jacobian(params, joint_.q);
  rec.det_j = J.determinant();
  const DynamicsTerms cart = cartesian_dynamics_terms(params, joint_, config_.singularity_eps);

  rec.x_dev = forward_kinematics(params, joint_.q) - x_op_;
  rec.xdot = J * joint_.qdot;

  TrackingTarget target;
  for (std::size_t a = 0; a < kAxes; ++a)
  {
    const AdmittanceChannel& ch = channels_[a];
    const ChannelState& s = ch.state();
    target.x_r(a) = s.plant.delta(0);
    target.xdot_r(a) = s.plant.delta(1);
    target.xddot_r(a) = ch.plant_derivative(rec.f_ext(a))(1);

    AxisRecord& axis = rec.axes[a];
    axis.delta = s.plant.delta;
    axis.delta_m = s.reference.delta_m;
    axis.region = ch.active_region();
    axis.k_x = s.gains.k_x;
    axis.lyapunov = ch.lyapunov_value();
  }

  const Vec2 accel = virtual_acceleration(config_.tracking, target, rec.x_dev, rec.xdot);
  const ControlEffort effort = feedback_linearize(cart, J, accel, rec.xdot, rec.f_ext);
  rec.force = effort.force;
  rec.torque = effort.torque;
  return rec;
}

TraceRecord Simulation::step(const Vec2& raw_force)
{
  TraceRecord rec = observe(raw_force);
  const auto& params = config_.manipulator;
  const Mat2 J = jacobian(params, joint_.q);
  JointState next = apply_torque(params, joint_, rec.torque, external_joint_torque(J, rec.f_ext), config_.dt,
                                 config_.singularity_eps);
  for (std::size_t a = 0; a < kAxes; ++a) channels_[a].step(rec.f_ext(a), config_.dt);
  joint_ = next;
  ++step_;
  return rec;
}

void Simulation::reset()
{
  for (auto& ch : channels_) ch.reset();
  joint_ = JointState{config_.q0, config_.qdot0};
  step_ = 0;
}

ScenarioResult run_scenario(const ScenarioConfig& config)
{
  ScenarioResult result;
  result.trace.dt = config.dt;
  result.trace.regions = config.subsystems.size();

  std::optional<Simulation> sim;
  try
  {
    sim.emplace(config);
  }
  catch (const AdmitError& e)
  {
    result.abort = SimAbort{e.kind(), 0, 0.0, e.what()};
    return result;
  }
  result.certificate = sim->certificate();

  const std::size_t n = config.step_count();
  result.trace.rows.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
  {
    const double t = static_cast<double>(k) * config.dt;
    const Vec2 raw = config.force.value(t);
    try
    {
      result.trace.rows.push_back(k < n ? sim->step(raw) : sim->observe(raw));
    }
    catch (const AdmitError& e)
    {
      result.abort = SimAbort{e.kind(), k, t, e.what()};
      break;
    }
  }
  result.metrics = compute_metrics(result.trace, config, *result.certificate);
  return result;
}

namespace {

std::vector<Row2> nominal_rows(const ScenarioConfig& config)
{
  const Vec2 B(0.0, 1.0 / config.virtual_mass);
  std::vector<Row2> out;
  for (const auto& a_m : config.subsystems) out.push_back(nominal_gains(config.plant_a, B, a_m));
  return out;
}

std::vector<Mat2> gamma_matrices(const ScenarioConfig& config)
{
  std::vector<Mat2> out;
  for (const auto& d : config.gamma_diagonals) out.push_back(d.asDiagonal());
  return out;
}

double spectral_norm(const Mat2& m)
{
  return std::sqrt(std::max(0.0, max_eigenvalue(m.transpose() * m)));
}

}  // namespace

RunMetrics compute_metrics(const SimTrace& trace, const ScenarioConfig& config, const CqlfCertificate& certificate)
{
  RunMetrics m;
  m.safety_limit = config.safety_limit;
  m.steps = trace.rows.size();
  m.duration = trace.rows.empty() ? 0.0 : trace.rows.back().t;
  m.min_abs_det_j = trace.rows.empty() ? 0.0 : std::abs(trace.rows.front().det_j);

  for (std::size_t k = 0; k < trace.rows.size(); ++k)
  {
    const TraceRecord& r = trace.rows[k];
    Vec2 x_r;
    for (std::size_t a = 0; a < kAxes; ++a)
    {
      const AxisRecord& ax = r.axes[a];
      const double d1 = std::abs(ax.delta(0));
      m.max_abs_delta1[a] = std::max(m.max_abs_delta1[a], d1);
      m.max_abs_delta_m1[a] = std::max(m.max_abs_delta_m1[a], std::abs(ax.delta_m(0)));
      if (d1 > config.safety_limit) ++m.safety_violations[a];
      if (k > 0 && trace.rows[k - 1].axes[a].region != ax.region) ++m.switch_count[a];
      x_r(a) = ax.delta(0);
    }
    const double tracking = (x_r - r.x_dev).norm();
    m.max_tracking_error = std::max(m.max_tracking_error, tracking);
    m.final_tracking_error = tracking;
    m.max_torque = std::max(m.max_torque, r.torque.cwiseAbs().maxCoeff());
    m.min_abs_det_j = std::min(m.min_abs_det_j, std::abs(r.det_j));
    m.max_inverse_inertia_norm =
        std::max(m.max_inverse_inertia_norm, spectral_norm(cartesian_inverse_inertia(config.manipulator, r.q)));
  }
  if (!trace.rows.empty())
  {
    for (std::size_t a = 0; a < kAxes; ++a)
    {
      const AxisRecord& ax = trace.rows.back().axes[a];
      m.final_mrac_error[a] = (ax.delta - ax.delta_m).norm();
    }
  }
  m.audit = run_audits(trace, config, certificate);
  return m;
}

LyapunovAudit run_lyapunov_audit(const SimTrace& trace, const CqlfCertificate& certificate,
                                 const std::vector<Row2>& nominal_gains, const std::vector<Mat2>& gamma, double tol)
{
  LyapunovAudit audit;
  std::array<double, kAxes> previous{};
  for (std::size_t k = 0; k < trace.rows.size(); ++k)
  {
    const TraceRecord& r = trace.rows[k];
    for (std::size_t a = 0; a < kAxes; ++a)
    {
      const AxisRecord& ax = r.axes[a];
      const double v = lyapunov_value(ax.delta - ax.delta_m, ax.k_x, nominal_gains, gamma, certificate.P);
      if (k == 0)
      {
        audit.initial_value[a] = v;
      }
      else
      {
        const double increase = v - previous[a];
        audit.max_increase = std::max(audit.max_increase, increase);
        if (increase > tol)
        {
          ++audit.violations;
          if (!audit.first_violation_step) audit.first_violation_step = r.step;
        }
      }
      previous[a] = v;
      audit.final_value[a] = v;
    }
  }
  return audit;
}

double skew_symmetry_residual(const TwoLinkParams& params, const JointState& state, double h)
{
  // d/dt (J^-T M J^-1) expanded through J-dot, so only the joint inertia is
  // differenced; differencing M_x itself loses digits near full stretch
  const Mat2 J = jacobian(params, state.q);
  const Mat2 J_inv = J.inverse();
  const Mat2 J_dot = jacobian_derivative(params, state.q, state.qdot);
  const Vec2 xdot = J * state.qdot;
  const Mat2 M = joint_dynamics_terms(params, state).M;
  const Mat2 M_dot = (joint_dynamics_terms(params, {state.q + h * state.qdot, state.qdot}).M -
                      joint_dynamics_terms(params, {state.q - h * state.qdot, state.qdot}).M) /
                     (2.0 * h);
  const Mat2 J_inv_dot = -J_inv * J_dot * J_inv;
  const Mat2 mx_dot =
      J_inv_dot.transpose() * M * J_inv + J_inv.transpose() * M_dot * J_inv + J_inv.transpose() * M * J_inv_dot;
  const Mat2 cx = cartesian_dynamics_terms(params, state).C;
  return xdot.dot((mx_dot - 2.0 * cx) * xdot);
}

AuditReport run_audits(const SimTrace& trace, const ScenarioConfig& config, const CqlfCertificate& certificate)
{
  AuditReport report;
  report.toggles = config.audit;
  const auto& tol = config.audit;
  const auto nominal = nominal_rows(config);
  const auto gamma = gamma_matrices(config);

  if (tol.lyapunov)
  {
    const LyapunovAudit lyap = run_lyapunov_audit(trace, certificate, nominal, gamma, tol.lyapunov_tol);
    report.max_lyapunov_increase = lyap.max_increase;
    report.lyapunov_violations = lyap.violations;
  }

  const ReferenceModel reference = config.build_reference();
  const Mat2 A = config.plant_a;
  const Vec2 B(0.0, 1.0 / config.virtual_mass);

  for (const TraceRecord& r : trace.rows)
  {
    const JointState js{r.q, r.qdot};

    if (tol.skew_symmetry && std::abs(r.det_j) > config.singularity_eps)
    {
      const double res = std::abs(skew_symmetry_residual(config.manipulator, js));
      report.max_skew_residual = std::max(report.max_skew_residual, res);
      if (res > tol.skew_tol * (1.0 + r.xdot.squaredNorm())) ++report.skew_violations;
    }

    if (tol.partition)
    {
      for (const AxisRecord& ax : r.axes)
      {
        const Vec2& selector = config.switch_source == SwitchSource::reference ? ax.delta_m : ax.delta;
        if (reference.partition.covering_count(selector) != 1) ++report.partition_violations;
      }
    }

    if (tol.linearization)
    {
      // Rebuild the commanded acceleration from logged quantities only.
      Vec2 x_r, xdot_r, xddot_r;
      for (std::size_t a = 0; a < kAxes; ++a)
      {
        const AxisRecord& ax = r.axes[a];
        const double u = ax.k_x.at(ax.region) * ax.delta + r.f_ext(a);
        const Vec2 rate = A * ax.delta + B * u;
        x_r(a) = ax.delta(0);
        xdot_r(a) = ax.delta(1);
        xddot_r(a) = rate(1);
      }
      const Vec2 a_cmd = xddot_r + config.tracking.kd * (xdot_r - r.xdot) + config.tracking.kp * (x_r - r.x_dev);
      const Mat2 J = jacobian(config.manipulator, r.q);
      const Vec2 qddot = joint_acceleration(config.manipulator, js, r.torque + external_joint_torque(J, r.f_ext));
      const Vec2 xddot = J * qddot + jacobian_derivative(config.manipulator, r.q, r.qdot) * r.qdot;
      const double res = (xddot - a_cmd).cwiseAbs().maxCoeff();
      report.max_linearization_residual = std::max(report.max_linearization_residual, res);
      if (res > tol.linearization_tol * (1.0 + a_cmd.cwiseAbs().maxCoeff())) ++report.linearization_violations;
    }
  }
  return report;
}

RealtimeSession::RealtimeSession(ScenarioConfig config)
    : sim_(std::move(config)), capacity_(std::max<std::size_t>(1, sim_.config().live.trace_capacity_steps))
{
  trace_.dt = sim_.config().dt;
  trace_.regions = sim_.config().subsystems.size();
}

StateSnapshot RealtimeSession::snapshot_of(const TraceRecord& record) const
{
  StateSnapshot s;
  s.record = record;
  s.operating_point = sim_.operating_point();
  s.x_base = record.x_dev + s.operating_point;
  for (std::size_t a = 0; a < kAxes; ++a)
  {
    s.safety_flag = s.safety_flag || record.axes[a].region != 0;
    s.limit_exceeded[a] = std::abs(record.axes[a].delta(0)) > sim_.config().safety_limit;
  }
  s.session_time = time_offset_ + record.t;
  s.epoch = epoch_;
  return s;
}

void RealtimeSession::reset()
{
  time_offset_ += sim_.time();
  ++epoch_;
  sim_.reset();
}

void RealtimeSession::reconfigure(ScenarioConfig config)
{
  Simulation next(std::move(config));
  time_offset_ += sim_.time();
  ++epoch_;
  sim_ = std::move(next);
  capacity_ = std::max<std::size_t>(1, sim_.config().live.trace_capacity_steps);
  if (trace_.dt != sim_.config().dt || trace_.regions != sim_.config().subsystems.size()) trace_.rows.clear();
  trace_.dt = sim_.config().dt;
  trace_.regions = sim_.config().subsystems.size();
}

StateSnapshot step_realtime(RealtimeSession& session, const Vec2& user_force, double dt)
{
  const double configured = session.sim_.config().dt;
  if (std::abs(dt - configured) > 1e-12 * configured)
  {
    std::ostringstream msg;
    msg << "live step dt " << dt << " s differs from configured dt " << configured << " s";
    throw AdmitError(ErrorKind::invalid_config, msg.str());
  }
  TraceRecord rec = session.sim_.step(user_force);
  auto& rows = session.trace_.rows;
  rows.push_back(rec);
  if (rows.size() > session.capacity_ + session.capacity_ / 4)
    rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(rows.size() - session.capacity_));
  return session.snapshot_of(rec);
}

}  // namespace admit
