#include "admit/tracking.hpp"

#include "admit/error.hpp"

namespace admit {

void PdGains::validate() const
{
  auto check = [](const Mat2& K, const char* field) {
    if (!K.allFinite() || (K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 || !(min_eigenvalue(K) > 0.0))
      throw AdmitError(ErrorKind::invalid_config,
                       std::string("tracking.") + field + ": must be symmetric positive definite");
  };
  check(kp, "kp_per_s2");
  check(kd, "kd_per_s");
}

Vec2 virtual_acceleration(const PdGains& gains, const TrackingTarget& target, const Vec2& x, const Vec2& xdot)
{
  return target.xddot_r + gains.kd * (target.xdot_r - xdot) + gains.kp * (target.x_r - x);
}

ControlEffort feedback_linearize(const DynamicsTerms& cart, const Mat2& J, const Vec2& a, const Vec2& xdot,
                                 const Vec2& f_ext)
{
  ControlEffort out;
  out.force = cart.M * a + cart.C * xdot + cart.G - f_ext;
  out.torque = J.transpose() * out.force;
  return out;
}

}  // namespace admit
