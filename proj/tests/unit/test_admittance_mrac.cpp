#include "admit/admittance_mrac.hpp"
#include "admit/cqlf.hpp"
#include "admit/error.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace admit;

namespace {

Mat2 a_m1()
{
  return (Mat2() << 0, 1, -5, -9).finished();
}
Mat2 a_m2()
{
  return (Mat2() << 0, 1, -20, -25).finished();
}
const Vec2 kB(0.0, 1.0);

ChannelConfig two_region_channel()
{
  ChannelConfig c;
  c.reference = build_paper_reference();
  c.gamma_diagonals = {Vec2(200.0, 200.0), Vec2(1000.0, 1000.0)};
  c.k_x0 = {Row2(-5.0, -9.0)};
  c.P = default_lyapunov_matrix();
  return c;
}

ChannelConfig single_channel(const Mat2& a_m, double gamma)
{
  ChannelConfig c;
  c.reference.subsystems.emplace_back(a_m, kB);
  c.reference.partition = Partition::whole_space();
  c.gamma_diagonals = {Vec2(gamma, gamma)};
  c.k_x0 = {Row2(a_m(1, 0), a_m(1, 1))};
  c.P = solve_lyapunov(a_m, Mat2::Identity());
  return c;
}

}  // namespace

TEST(NominalGains, MatchingCondition)
{
  const Mat2 A = (Mat2() << 0, 1, 0, 0).finished();
  EXPECT_EQ(nominal_gains(A, kB, a_m1()), Row2(-5.0, -9.0));
  EXPECT_EQ(nominal_gains(A, kB, a_m2()), Row2(-20.0, -25.0));
  // virtual mass 2: A + B K = A_m needs K = 2 [-5, -9]
  EXPECT_EQ(nominal_gains(A, Vec2(0.0, 0.5), a_m1()), Row2(-10.0, -18.0));
  try
  {
    nominal_gains(A, kB, (Mat2() << -1, 1, -5, -9).finished());
    FAIL() << "expected unmatchable";
  }
  catch (const AdmitError& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::unmatchable);
  }
}

TEST(GainLaw, RateMatchesHandComputation)
{
  // e^T P B = 0.1 * 2.22 + 0.3 * 3.90 = 1.392; K_dot = -200 * delta^T * 1.392
  const Row2 rate =
      gain_rate(Vec2(200.0, 200.0).asDiagonal(), Vec2(0.5, -0.2), Vec2(0.1, 0.3), default_lyapunov_matrix(), kB);
  EXPECT_NEAR(rate(0), -139.2, 1e-12);
  EXPECT_NEAR(rate(1), 55.68, 1e-12);
}

TEST(GainLaw, FrozenUpdateTouchesOnlyActiveRegion)
{
  ChannelState s;
  s.plant.delta = Vec2(0.5, -0.2);
  s.reference.delta_m = Vec2(0.4, -0.5);
  s.gains.k_x = {Row2(-5, -9), Row2(-5, -9)};
  s.gains.gamma = {Vec2(200, 200).asDiagonal(), Vec2(1000, 1000).asDiagonal()};
  const AdaptiveGains next = gain_update(s, 1, default_lyapunov_matrix(), 1e-3);
  EXPECT_EQ(next.k_x[0], s.gains.k_x[0]);
  EXPECT_NEAR(next.k_x[1](0), -5.0 - 1e-3 * 1000 * 0.5 * 1.392, 1e-12);
  EXPECT_NEAR(next.k_x[1](1), -9.0 + 1e-3 * 1000 * 0.2 * 1.392, 1e-12);
}

TEST(LyapunovValue, HandComputation)
{
  const Mat2 P = default_lyapunov_matrix();
  const Vec2 e(0.1, -0.2);
  const double quad = 0.5 * (8.16 * 0.01 - 2 * 2.22 * 0.02 + 3.90 * 0.04);
  const double gains = 0.5 * (1.0 / 200.0 + 4.0 / 200.0) + 0.5 * (9.0 / 1000.0);
  const double v = lyapunov_value(e, {Row2(-4, -11), Row2(-20, -22)}, {Row2(-5, -9), Row2(-20, -25)},
                                  {Vec2(200, 200).asDiagonal(), Vec2(1000, 1000).asDiagonal()}, P);
  EXPECT_NEAR(v, quad + gains, 1e-14);
}

TEST(Channel, MatchedStartTracksReferenceInSoftRegion)
{
  AdmittanceChannel ch(two_region_channel());
  for (int k = 0; k < 3000; ++k)
  {
    ch.step(3.0 * std::sin(0.5 * k * 1e-3), 1e-3);
    ASSERT_EQ(ch.active_region(), 0u);
  }
  EXPECT_LT(ch.state().mrac_error().norm(), 1e-15);
  EXPECT_EQ(ch.state().gains.k_x[0], Row2(-5.0, -9.0));
}

TEST(Channel, SoftRegionFrequencyResponse)
{
  // |G(j w)| = 1 / |5 - w^2 + 9 j w| at w = 0.5: 7.5 / sqrt(42.8125)
  const double expected = 7.5 / std::sqrt(42.8125);
  EXPECT_NEAR(expected, 1.14624, 1e-5);
  AdmittanceChannel ch(single_channel(a_m1(), 200.0));
  const double dt = 1e-3;
  double late_peak = 0.0;
  for (int k = 0; k < 60000; ++k)
  {
    const double t = k * dt;
    if (t >= 30.0) late_peak = std::max(late_peak, std::abs(ch.state().plant.delta(0)));
    ch.step(7.5 * std::sin(0.5 * t), dt);
  }
  EXPECT_NEAR(late_peak, expected, 1e-5);
}

TEST(Channel, ForceIsClamped)
{
  AdmittanceChannel a(two_region_channel()), b(two_region_channel());
  for (int k = 0; k < 500; ++k)
  {
    a.step(25.0, 1e-3);
    b.step(20.0, 1e-3);
  }
  EXPECT_EQ(a.state().plant.delta, b.state().plant.delta);
  EXPECT_EQ(a.clamp_force(-1e9), -20.0);
}

TEST(Channel, LyapunovNonIncreasingAndGainsBounded)
{
  // start off-nominal so adaptation has work to do
  ChannelConfig cfg = two_region_channel();
  cfg.delta0 = Vec2(0.3, 0.0);
  AdmittanceChannel ch(cfg);
  const double v0 = ch.lyapunov_value();
  double v_prev = v0, worst_increase = 0.0;
  for (int k = 0; k < 30000; ++k)
  {
    const double t = k * 1e-3;
    ch.step(7.5 * std::sin(0.5 * t), 1e-3);
    const double v = ch.lyapunov_value();
    worst_increase = std::max(worst_increase, v - v_prev);
    v_prev = v;
    // |K_i - K*_i|^2 / lambda_max(Gamma_i) <= 2 V(0)
    for (std::size_t i = 0; i < 2; ++i)
    {
      const Row2 dk = ch.state().gains.k_x[i] - ch.nominal()[i];
      ASSERT_LE(dk.squaredNorm() / cfg.gamma_diagonals[i].maxCoeff(), 2.0 * v0 + 1e-9);
    }
  }
  EXPECT_LE(worst_increase, 1e-9);
  EXPECT_LT(v_prev, v0);
}

TEST(Channel, PinnedGainsDecayAtSlowestReferenceRate)
{
  for (const Mat2& a : {a_m1(), a_m2()})
  {
    ChannelConfig cfg = single_channel(a, 200.0);
    cfg.adaptation_enabled = false;
    cfg.delta0 = Vec2(0.5, 0.0);
    AdmittanceChannel ch(cfg);
    const double dt = 1e-3;
    double e5 = 0.0;
    for (int k = 0; k < 15000; ++k)
    {
      if (k == 5000) e5 = ch.state().mrac_error().norm();
      ch.step(0.0, dt);
    }
    const double e15 = ch.state().mrac_error().norm();
    const double rate = std::log(e15 / e5) / 10.0;
    // roots of s^2 - a22 s - a21, taking the one nearer zero
    const double slowest = (a(1, 1) + std::sqrt(a(1, 1) * a(1, 1) + 4.0 * a(1, 0))) / 2.0;
    EXPECT_NEAR(rate, slowest, 1e-3 * std::abs(slowest)) << "A_m = " << a;
  }
}

TEST(Channel, RejectsBadConfig)
{
  ChannelConfig c = two_region_channel();
  c.gamma_diagonals[1] = Vec2(0.0, 1.0);
  EXPECT_THROW(AdmittanceChannel{c}, AdmitError);
  c = two_region_channel();
  c.f_max = 0.0;
  EXPECT_THROW(AdmittanceChannel{c}, AdmitError);
  c = two_region_channel();
  c.k_x0 = {Row2(1, 2), Row2(3, 4), Row2(5, 6)};
  EXPECT_THROW(AdmittanceChannel{c}, AdmitError);
  c = two_region_channel();
  c.reference.subsystems[1] = Subsystem(a_m2(), Vec2(0.0, 2.0));
  EXPECT_THROW(AdmittanceChannel{c}, AdmitError);
}

TEST(Channel, ResetRestoresInitialState)
{
  AdmittanceChannel ch(two_region_channel());
  for (int k = 0; k < 4000; ++k) ch.step(20.0, 1e-3);
  EXPECT_EQ(ch.active_region(), 1u);
  ch.reset();
  EXPECT_EQ(ch.state().plant.delta, Vec2::Zero());
  EXPECT_EQ(ch.state().gains.k_x[1], Row2(-5.0, -9.0));
  EXPECT_EQ(ch.active_region(), 0u);
}

TEST(Channel, NonFiniteForceRejected)
{
  AdmittanceChannel ch(two_region_channel());
  EXPECT_THROW(ch.step(std::nan(""), 1e-3), AdmitError);
}
