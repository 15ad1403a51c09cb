#include "admit/manipulator.hpp"

#include "admit/error.hpp"
#include "admit/rk4.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace admit {

void TwoLinkParams::validate() const
{
  auto require = [](bool ok, const char* field) {
    if (!ok)
      throw AdmitError(ErrorKind::invalid_config,
                       std::string("manipulator.") + field + ": must be positive and finite");
  };
  require(std::isfinite(m1) && m1 > 0.0, "m1_kg");
  require(std::isfinite(m2) && m2 > 0.0, "m2_kg");
  require(std::isfinite(l1) && l1 > 0.0, "l1_m");
  require(std::isfinite(l2) && l2 > 0.0, "l2_m");
  if (!std::isfinite(g) || g < 0.0)
    throw AdmitError(ErrorKind::invalid_config, "manipulator.g_mps2: must be finite and >= 0");
}

Vec2 forward_kinematics(const TwoLinkParams& p, const Vec2& q)
{
  const double q12 = q(0) + q(1);
  return {p.l1 * std::cos(q(0)) + p.l2 * std::cos(q12), p.l1 * std::sin(q(0)) + p.l2 * std::sin(q12)};
}

Mat2 jacobian(const TwoLinkParams& p, const Vec2& q)
{
  const double s1 = std::sin(q(0));
  const double c1 = std::cos(q(0));
  const double s12 = std::sin(q(0) + q(1));
  const double c12 = std::cos(q(0) + q(1));
  Mat2 J;
  J << -p.l1 * s1 - p.l2 * s12, -p.l2 * s12, p.l1 * c1 + p.l2 * c12, p.l2 * c12;
  return J;
}

Mat2 jacobian_derivative(const TwoLinkParams& p, const Vec2& q, const Vec2& qdot)
{
  const double s1 = std::sin(q(0));
  const double c1 = std::cos(q(0));
  const double s12 = std::sin(q(0) + q(1));
  const double c12 = std::cos(q(0) + q(1));
  const double w1 = qdot(0);
  const double w12 = qdot(0) + qdot(1);
  Mat2 Jd;
  Jd << -p.l1 * c1 * w1 - p.l2 * c12 * w12, -p.l2 * c12 * w12, -p.l1 * s1 * w1 - p.l2 * s12 * w12, -p.l2 * s12 * w12;
  return Jd;
}

SingularityStatus singularity_check(const Mat2& J, double eps)
{
  const double det = J.determinant();
  return std::isfinite(det) && std::abs(det) > eps ? SingularityStatus::ok : SingularityStatus::singular;
}

CartesianState to_cartesian(const TwoLinkParams& p, const JointState& s)
{
  return {forward_kinematics(p, s.q), jacobian(p, s.q) * s.qdot};
}

DynamicsTerms joint_dynamics_terms(const TwoLinkParams& p, const JointState& s)
{
  const double p1 = p.m2 * p.l2 * p.l2;
  const double p2 = p.m2 * p.l1 * p.l2 * std::cos(s.q(1));
  const double h = p.m2 * p.l1 * p.l2 * std::sin(s.q(1));
  const double qd1 = s.qdot(0);
  const double qd2 = s.qdot(1);

  DynamicsTerms t;
  t.M << p1 + 2.0 * p2 + (p.m1 + p.m2) * p.l1 * p.l1, p1 + p2, p1 + p2, p1;
  t.C << -h * qd2, -h * (qd1 + qd2), h * qd1, 0.0;
  if (p.gravity_enabled)
  {
    const double c1 = std::cos(s.q(0));
    const double c12 = std::cos(s.q(0) + s.q(1));
    t.G << p.m2 * p.l2 * p.g * c12 + (p.m1 + p.m2) * p.l1 * p.g * c1, p.m2 * p.l2 * p.g * c12;
  }
  else
  {
    t.G.setZero();
  }
  return t;
}

namespace {

[[noreturn]] void throw_singular(const JointState& s, double det)
{
  std::ostringstream os;
  os << "Jacobian singular at q=[" << s.q(0) << ", " << s.q(1) << "], det J=" << det;
  throw AdmitError(ErrorKind::singular, os.str());
}

}  // namespace

DynamicsTerms cartesian_dynamics_terms(const TwoLinkParams& p, const JointState& s, double eps)
{
  const Mat2 J = jacobian(p, s.q);
  if (singularity_check(J, eps) == SingularityStatus::singular) throw_singular(s, J.determinant());

  const Mat2 J_inv = J.inverse();
  const Mat2 J_inv_T = J_inv.transpose();
  const Mat2 Jd = jacobian_derivative(p, s.q, s.qdot);
  const DynamicsTerms joint = joint_dynamics_terms(p, s);

  DynamicsTerms cart;
  cart.M = symmetrize(J_inv_T * joint.M * J_inv);
  cart.C = J_inv_T * (joint.C - joint.M * J_inv * Jd) * J_inv;
  cart.G = J_inv_T * joint.G;
  return cart;
}

Mat2 cartesian_inverse_inertia(const TwoLinkParams& p, const Vec2& q)
{
  const Mat2 J = jacobian(p, q);
  const DynamicsTerms joint = joint_dynamics_terms(p, JointState{q, Vec2::Zero()});
  return symmetrize(J * joint.M.inverse() * J.transpose());
}

Vec2 joint_acceleration(const TwoLinkParams& p, const JointState& s, const Vec2& tau_total)
{
  const DynamicsTerms t = joint_dynamics_terms(p, s);
  return t.M.ldlt().solve(tau_total - t.C * s.qdot - t.G);
}

JointState apply_torque(const TwoLinkParams& p, const JointState& s, const Vec2& tau, const Vec2& tau_ext, double dt,
                        double eps)
{
  if (!s.q.allFinite() || !s.qdot.allFinite() || !tau.allFinite() || !tau_ext.allFinite())
    throw AdmitError(ErrorKind::nonfinite_state, "non-finite joint state or torque input");
  const Mat2 J = jacobian(p, s.q);
  if (singularity_check(J, eps) == SingularityStatus::singular) throw_singular(s, J.determinant());

  using State4 = Eigen::Vector4d;
  const Vec2 tau_total = tau + tau_ext;
  auto rhs = [&](const State4& x) {
    const JointState js{x.head<2>(), x.tail<2>()};
    State4 dx;
    dx << js.qdot, joint_acceleration(p, js, tau_total);
    return dx;
  };
  State4 x;
  x << s.q, s.qdot;
  const State4 next = rk4_step(x, dt, rhs);
  if (!next.allFinite()) throw AdmitError(ErrorKind::nonfinite_state, "joint state diverged during integration");
  return {next.head<2>(), next.tail<2>()};
}

Vec2 inverse_kinematics(const TwoLinkParams& p, const Vec2& x)
{
  const double r2 = x.squaredNorm();
  const double c2 = (r2 - p.l1 * p.l1 - p.l2 * p.l2) / (2.0 * p.l1 * p.l2);
  if (!(c2 >= -1.0 && c2 <= 1.0))
    throw AdmitError(ErrorKind::invalid_config, "inverse kinematics: target outside the reachable annulus");
  const double q2 = std::acos(c2);
  const double q1 = std::atan2(x(1), x(0)) - std::atan2(p.l2 * std::sin(q2), p.l1 + p.l2 * std::cos(q2));
  return {q1, q2};
}

double kinetic_energy(const TwoLinkParams& p, const JointState& s)
{
  const DynamicsTerms t = joint_dynamics_terms(p, s);
  return 0.5 * s.qdot.dot(t.M * s.qdot);
}

}  // namespace admit
