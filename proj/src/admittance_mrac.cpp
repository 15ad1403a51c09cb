#include "admit/admittance_mrac.hpp"

#include "admit/error.hpp"
#include "admit/rk4.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace admit {

double control_input(const AdaptiveGains& gains, std::size_t region, const Vec2& delta, double r)
{
  return gains.k_x.at(region).dot(delta) + gains.k_r * r;
}

Row2 nominal_gains(const Mat2& A, const Vec2& B, const Mat2& A_mi)
{
  const Mat2 diff = A_mi - A;
  const double tol = 1e-12 * std::max(1.0, A_mi.cwiseAbs().maxCoeff());
  if (std::abs(diff(0, 0)) > tol || std::abs(diff(0, 1)) > tol || std::abs(B(0)) > 0.0)
    throw AdmitError(ErrorKind::unmatchable, "matching condition infeasible: A_m - A has a nonzero first row");
  if (!(B(1) != 0.0)) throw AdmitError(ErrorKind::unmatchable, "matching condition infeasible: B has no actuated row");
  return diff.row(1) / B(1);
}

Row2 gain_rate(const Mat2& gamma, const Vec2& delta, const Vec2& error, const Mat2& P, const Vec2& B)
{
  const double ePB = error.dot(P * B);
  return (-(gamma * delta) * ePB).transpose();
}

AdaptiveGains gain_update(const ChannelState& ch, std::size_t active_region, const Mat2& P, double dt)
{
  AdaptiveGains next = ch.gains;
  next.k_x.at(active_region) +=
      dt * gain_rate(ch.gains.gamma.at(active_region), ch.plant.delta, ch.mrac_error(), P, ch.plant.B);
  return next;
}

double lyapunov_value(const Vec2& error, const std::vector<Row2>& k_x, const std::vector<Row2>& nominal,
                      const std::vector<Mat2>& gamma, const Mat2& P)
{
  double v = 0.5 * error.dot(P * error);
  for (std::size_t i = 0; i < k_x.size(); ++i)
  {
    const Row2 dk = k_x[i] - nominal[i];
    v += 0.5 * dk.dot(gamma[i].inverse() * dk.transpose());
  }
  return v;
}

AdmittanceChannel::AdmittanceChannel(ChannelConfig config) : config_(std::move(config))
{
  const std::size_t s = config_.reference.subsystems.size();
  if (s == 0) throw AdmitError(ErrorKind::invalid_config, "admittance.subsystems: at least one subsystem required");
  if (config_.reference.partition.subsystem_count() != s)
    throw AdmitError(ErrorKind::invalid_config, "admittance.partition: region count does not match subsystem count");
  if (!(config_.virtual_mass > 0.0) || !std::isfinite(config_.virtual_mass))
    throw AdmitError(ErrorKind::invalid_config, "admittance.virtual_mass_kg: must be positive");
  if (!(config_.f_max > 0.0) || !std::isfinite(config_.f_max))
    throw AdmitError(ErrorKind::invalid_config, "admittance.f_max_n: must be positive");
  if (config_.gamma_diagonals.size() != s)
    throw AdmitError(ErrorKind::invalid_config, "admittance.gamma_diag: one entry per subsystem required");
  for (std::size_t i = 0; i < s; ++i)
  {
    const Vec2& g = config_.gamma_diagonals[i];
    if (!(g(0) > 0.0 && g(1) > 0.0) || !g.allFinite())
    {
      std::ostringstream os;
      os << "admittance.gamma_diag[" << i << "]: entries must be strictly positive";
      throw AdmitError(ErrorKind::invalid_config, os.str());
    }
  }

  const Vec2 B(0.0, 1.0 / config_.virtual_mass);
  for (std::size_t i = 0; i < s; ++i)
  {
    if ((config_.reference.subsystems[i].b_m() - B).cwiseAbs().maxCoeff() > 1e-12)
    {
      std::ostringstream os;
      os << "admittance.subsystems[" << i << "]: B_m must equal the plant B (K_r is fixed at 1)";
      throw AdmitError(ErrorKind::invalid_config, os.str());
    }
    nominal_.push_back(nominal_gains(config_.plant_a, B, config_.reference.subsystems[i].a_m()));
  }
  reset();
}

void AdmittanceChannel::reset()
{
  const std::size_t s = config_.reference.subsystems.size();
  state_ = ChannelState{};
  state_.plant.A = config_.plant_a;
  state_.plant.B = Vec2(0.0, 1.0 / config_.virtual_mass);
  state_.plant.delta = config_.delta0;
  state_.reference.delta_m = config_.delta_m0;
  if (config_.k_x0.size() == 1)
    state_.gains.k_x.assign(s, config_.k_x0.front());
  else if (config_.k_x0.size() == s)
    state_.gains.k_x = config_.k_x0;
  else
    throw AdmitError(ErrorKind::invalid_config, "admittance.k_x0: give one row or one row per subsystem");
  state_.gains.gamma.clear();
  for (const auto& g : config_.gamma_diagonals) state_.gains.gamma.push_back(g.asDiagonal().toDenseMatrix());
  state_.gains.k_r = 1.0;
  state_.reference.active_region = active_region();
}

std::size_t AdmittanceChannel::active_region() const
{
  const Vec2& selector =
      config_.switch_source == SwitchSource::reference ? state_.reference.delta_m : state_.plant.delta;
  return config_.reference.partition.indicator(selector);
}

double AdmittanceChannel::clamp_force(double force) const
{
  return std::clamp(force, -config_.f_max, config_.f_max);
}

Vec2 AdmittanceChannel::plant_derivative(double r) const
{
  const std::size_t region = active_region();
  const double u = control_input(state_.gains, region, state_.plant.delta, r);
  return state_.plant.A * state_.plant.delta + state_.plant.B * u;
}

double AdmittanceChannel::lyapunov_value() const
{
  return admit::lyapunov_value(state_.mrac_error(), state_.gains.k_x, nominal_, state_.gains.gamma, config_.P);
}

void AdmittanceChannel::step(double force, double dt)
{
  if (!std::isfinite(force)) throw AdmitError(ErrorKind::nonfinite_state, "non-finite force input");
  const double r = clamp_force(force);
  const std::size_t region = active_region();
  const Mat2& A = state_.plant.A;
  const Vec2& B = state_.plant.B;
  const Subsystem& sub = config_.reference.subsystems[region];
  const Mat2& gamma = state_.gains.gamma[region];
  const Mat2& P = config_.P;
  const double k_r = state_.gains.k_r;
  const bool adapt = config_.adaptation_enabled;

  // Augmented state [delta; delta_m; K_x(active)^T].
  using State6 = Eigen::Matrix<double, 6, 1>;
  auto rhs = [&](const State6& x) {
    const Vec2 delta = x.segment<2>(0);
    const Vec2 delta_m = x.segment<2>(2);
    const Row2 k = x.segment<2>(4).transpose();
    State6 dx;
    dx.segment<2>(0) = A * delta + B * (k.dot(delta) + k_r * r);
    dx.segment<2>(2) = sub.derivative(delta_m, r);
    if (adapt)
      dx.segment<2>(4) = gain_rate(gamma, delta, delta - delta_m, P, B).transpose();
    else
      dx.segment<2>(4).setZero();
    return dx;
  };

  State6 x;
  x << state_.plant.delta, state_.reference.delta_m, state_.gains.k_x[region].transpose();
  const State6 next = rk4_step(x, dt, rhs);
  if (!next.allFinite()) throw AdmitError(ErrorKind::nonfinite_state, "admittance channel state diverged");

  state_.plant.delta = next.segment<2>(0);
  state_.reference.delta_m = next.segment<2>(2);
  state_.gains.k_x[region] = next.segment<2>(4).transpose();
  state_.reference.active_region = active_region();
}

}  // namespace admit
