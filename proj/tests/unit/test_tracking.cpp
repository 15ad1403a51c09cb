#include "admit/error.hpp"
#include "admit/manipulator.hpp"
#include "admit/tracking.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace admit;

TEST(Tracking, VirtualAccelerationIsPdPlusFeedforward)
{
  PdGains g;
  TrackingTarget t{Vec2(0.1, -0.2), Vec2(0.3, 0.0), Vec2(1.0, 2.0)};
  const Vec2 a = virtual_acceleration(g, t, Vec2(0.0, 0.0), Vec2(0.1, 0.1));
  EXPECT_NEAR(a(0), 1.0 + 20.0 * 0.2 + 100.0 * 0.1, 1e-12);
  EXPECT_NEAR(a(1), 2.0 + 20.0 * -0.1 + 100.0 * -0.2, 1e-12);
}

TEST(Tracking, FeedbackLinearizationRealizesCommandedAcceleration)
{
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> q1(-3.0, 3.0), q2(0.3, 2.8), rate(-2.0, 2.0), force(-20.0, 20.0),
      acc(-10.0, 10.0);
  for (bool gravity : {false, true})
  {
    TwoLinkParams p;
    p.gravity_enabled = gravity;
    for (int i = 0; i < 200; ++i)
    {
      const JointState s{Vec2(q1(rng), q2(rng)), Vec2(rate(rng), rate(rng))};
      const Mat2 J = jacobian(p, s.q);
      const Vec2 xdot = J * s.qdot;
      const Vec2 a(acc(rng), acc(rng));
      const Vec2 f_ext(force(rng), force(rng));
      const ControlEffort u = feedback_linearize(cartesian_dynamics_terms(p, s), J, a, xdot, f_ext);
      const Vec2 qdd = joint_acceleration(p, s, u.torque + external_joint_torque(J, f_ext));
      const Vec2 xdd = J * qdd + jacobian_derivative(p, s.q, s.qdot) * s.qdot;
      EXPECT_LT((xdd - a).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Tracking, GainValidation)
{
  PdGains g;
  EXPECT_NO_THROW(g.validate());
  g.kp(0, 1) = 5.0;  // not symmetric
  EXPECT_THROW(g.validate(), AdmitError);
  g = PdGains{};
  g.kd = -g.kd;
  EXPECT_THROW(g.validate(), AdmitError);
}
