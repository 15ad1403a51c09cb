#pragma once

#include "admit/linalg.hpp"
#include "admit/manipulator.hpp"

namespace admit {

struct PdGains
{
  Mat2 kp = 100.0 * Mat2::Identity();  // 1/s^2
  Mat2 kd = 20.0 * Mat2::Identity();   // 1/s

  /// Throws AdmitError(invalid_config) unless both are symmetric positive definite.
  void validate() const;
};

/// Reference motion in operating-point deviation coordinates.
struct TrackingTarget
{
  Vec2 x_r = Vec2::Zero();
  Vec2 xdot_r = Vec2::Zero();
  Vec2 xddot_r = Vec2::Zero();
};

struct ControlEffort
{
  Vec2 force = Vec2::Zero();   // Cartesian, N
  Vec2 torque = Vec2::Zero();  // joint, N m
};

/// a = xddot_r + K_d (xdot_r - xdot) + K_p (x_r - x), with x in the target's frame.
Vec2 virtual_acceleration(const PdGains& gains, const TrackingTarget& target, const Vec2& x, const Vec2& xdot);

/// F = M_x a + C_x xdot + G_x - F_ext and tau = J^T F, which turns the
/// Cartesian dynamics into xddot = a.
ControlEffort feedback_linearize(const DynamicsTerms& cartesian, const Mat2& J, const Vec2& a, const Vec2& xdot,
                                 const Vec2& f_ext);

}  // namespace admit
