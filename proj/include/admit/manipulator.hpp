#pragma once

#include "admit/linalg.hpp"

namespace admit {

/// Threshold on |det J| below which a configuration is treated as singular.
inline constexpr double kSingularityEpsilon = 1e-6;

/// Point-mass two-link planar arm. Defaults: m1 1.5 kg, m2 1 kg, links 0.85 m.
struct TwoLinkParams
{
  double m1 = 1.5;   // kg
  double m2 = 1.0;   // kg
  double l1 = 0.85;  // m
  double l2 = 0.85;  // m
  double g = 9.81;   // m/s^2
  bool gravity_enabled = true;

  /// Throws AdmitError(invalid_config) on non-positive masses/lengths or g < 0.
  void validate() const;
};

struct JointState
{
  Vec2 q = Vec2::Zero();     // rad
  Vec2 qdot = Vec2::Zero();  // rad/s
};

struct CartesianState
{
  Vec2 x = Vec2::Zero();     // m
  Vec2 xdot = Vec2::Zero();  // m/s
};

/// M xddot + C xdot + G = input, either in joint or Cartesian coordinates.
struct DynamicsTerms
{
  Mat2 M = Mat2::Identity();
  Mat2 C = Mat2::Zero();
  Vec2 G = Vec2::Zero();
};

enum class SingularityStatus
{
  ok,
  singular,
};

Vec2 forward_kinematics(const TwoLinkParams& params, const Vec2& q);

Mat2 jacobian(const TwoLinkParams& params, const Vec2& q);

/// Time derivative of the Jacobian along (q, qdot), differentiated analytically.
Mat2 jacobian_derivative(const TwoLinkParams& params, const Vec2& q, const Vec2& qdot);

SingularityStatus singularity_check(const Mat2& J, double eps = kSingularityEpsilon);

CartesianState to_cartesian(const TwoLinkParams& params, const JointState& state);

/// Joint-space inertia, Coriolis/centripetal and gravity terms.
/// C is the Christoffel form, so Mdot - 2C is skew-symmetric.
DynamicsTerms joint_dynamics_terms(const TwoLinkParams& params, const JointState& state);

/// Cartesian terms M_x = J^-T M J^-1, C_x = J^-T (C - M J^-1 Jdot) J^-1,
/// G_x = J^-T G. Throws AdmitError(singular) when |det J| <= eps.
DynamicsTerms cartesian_dynamics_terms(const TwoLinkParams& params, const JointState& state,
                                       double eps = kSingularityEpsilon);

/// M_x^-1 = J M^-1 J^T, evaluated without inverting J.
Mat2 cartesian_inverse_inertia(const TwoLinkParams& params, const Vec2& q);

/// qddot = M^-1 (tau_total - C qdot - G).
Vec2 joint_acceleration(const TwoLinkParams& params, const JointState& state, const Vec2& tau_total);

/// One RK4 step of the joint-space dynamics with torques held over the step.
/// Throws AdmitError(singular) if the start configuration is singular and
/// AdmitError(nonfinite_state) if the result is not finite.
JointState apply_torque(const TwoLinkParams& params, const JointState& state, const Vec2& tau, const Vec2& tau_ext,
                        double dt, double eps = kSingularityEpsilon);

/// Joint torque equivalent of a Cartesian end-effector force, J^T F.
inline Vec2 external_joint_torque(const Mat2& J, const Vec2& force)
{
  return J.transpose() * force;
}

/// Inverse kinematics for the elbow configuration with q2 in [0, pi].
/// Throws AdmitError(invalid_config) for unreachable targets.
Vec2 inverse_kinematics(const TwoLinkParams& params, const Vec2& x);

double kinetic_energy(const TwoLinkParams& params, const JointState& state);

}  // namespace admit
