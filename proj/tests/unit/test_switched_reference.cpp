#include "admit/error.hpp"
#include "admit/switched_reference.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

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

ReferenceModel single(const Mat2& a)
{
  ReferenceModel m;
  m.subsystems.emplace_back(a, kB);
  m.partition = Partition::whole_space();
  return m;
}

Vec2 integrate(const ReferenceModel& m, Vec2 d0, double r, double t_end, double dt)
{
  ReferenceState s{d0, 0};
  const long n = std::lround(t_end / dt);
  for (long k = 0; k < n; ++k) s = reference_step(m, s, r, dt);
  return s.delta_m;
}

}  // namespace

TEST(Subsystem, RejectsNonHurwitz)
{
  try
  {
    Subsystem s((Mat2() << 0, 1, 5, -9).finished(), kB);
    FAIL() << "expected not_hurwitz";
  }
  catch (const AdmitError& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::not_hurwitz);
  }
  EXPECT_THROW(Subsystem((Mat2() << 0, 1, -5, 0).finished(), kB), AdmitError);
}

TEST(Partition, ThresholdBoundaryBelongsToSoftRegion)
{
  const ReferenceModel m = build_paper_reference();
  const double thr = 0.998;
  EXPECT_EQ(m.partition.indicator(Vec2(thr, 0.0)), 0u);
  EXPECT_EQ(m.partition.indicator(Vec2(-thr, 5.0)), 0u);
  EXPECT_EQ(m.partition.indicator(Vec2(std::nextafter(thr, 2.0), 0.0)), 1u);
  EXPECT_EQ(m.partition.indicator(Vec2(-std::nextafter(thr, 2.0), 0.0)), 1u);
  EXPECT_EQ(m.partition.indicator(Vec2(0.0, 100.0)), 0u);
  EXPECT_EQ(m.partition.indicator(Vec2(1.5, -3.0)), 1u);
}

TEST(Partition, CoversEveryStateExactlyOnce)
{
  const ReferenceModel m = build_paper_reference();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> wide(-3.0, 3.0), near(-1e-9, 1e-9);
  for (int i = 0; i < 100000; ++i)
  {
    // half the samples straddle the switching surface
    const double x = (i % 2) ? wide(rng) : (i % 4 ? 0.998 : -0.998) + near(rng);
    const Vec2 d(x, wide(rng));
    ASSERT_EQ(m.partition.covering_count(d), 1u) << "at " << d.transpose();
    ASSERT_EQ(m.partition.indicator(d), std::abs(x) <= 0.998 ? 0u : 1u);
  }
}

TEST(Partition, GapAndOverlapAreReported)
{
  // x <= -1 and x >= 1 leave a gap in between
  HalfSpace left{Eigen::RowVector3d(1.0, 0.0, 1.0), false};
  HalfSpace right{Eigen::RowVector3d(-1.0, 0.0, 1.0), false};
  Partition gap({Polyhedron{{left}, 0}, Polyhedron{{right}, 1}}, 2);
  try
  {
    gap.indicator(Vec2(0.0, 0.0));
    FAIL() << "expected uncovered_state";
  }
  catch (const AdmitError& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::uncovered_state);
  }
  // x <= 1 and x >= -1 overlap in between
  HalfSpace le1{Eigen::RowVector3d(1.0, 0.0, -1.0), false};
  HalfSpace ge_m1{Eigen::RowVector3d(-1.0, 0.0, -1.0), false};
  Partition overlap({Polyhedron{{le1}, 0}, Polyhedron{{ge_m1}, 1}}, 2);
  EXPECT_EQ(overlap.covering_count(Vec2(0.0, 0.0)), 2u);
  EXPECT_THROW(overlap.indicator(Vec2(0.0, 0.0)), AdmitError);
}

TEST(ReferenceStep, StiffSubsystemUnderConstantForce)
{
  // d'' + 25 d' + 20 d = 20: value at t = 5 from the matrix exponential
  const ReferenceModel m = single(a_m2());
  const Vec2 at5 = integrate(m, Vec2::Zero(), 20.0, 5.0, 1e-3);
  const Vec2 exact = oracle::forced_response(a_m2(), kB, 20.0, Vec2::Zero(), 5.0);
  EXPECT_NEAR(exact(0), 0.98346184, 1e-8);
  EXPECT_NEAR(at5(0), exact(0), 1e-9);
  EXPECT_NEAR(at5(1), exact(1), 1e-9);
  // inside the 1 % band one second later, settling to F / k = 1
  EXPECT_NEAR(integrate(m, Vec2::Zero(), 20.0, 6.0, 1e-3)(0), 1.0, 0.01);
  EXPECT_NEAR(integrate(m, Vec2::Zero(), 20.0, 30.0, 1e-3)(0), 1.0, 1e-8);
}

TEST(ReferenceStep, CriticallyDampedOracle)
{
  // x'' + 20 x' + 100 x = 0 from x = 1: (1 + 10 t) e^{-10 t}
  const ReferenceModel m = single((Mat2() << 0, 1, -100, -20).finished());
  // RK4 at h = 1 ms with rate 10/s: about (10 h)^5 / 120 per step, 1e-10 after 100 steps
  for (double t : {0.05, 0.1, 0.3, 1.0})
    EXPECT_NEAR(integrate(m, Vec2(1.0, 0.0), 0.0, t, 1e-3)(0), (1.0 + 10.0 * t) * std::exp(-10.0 * t), 1e-9);
}

TEST(ReferenceStep, SwitchKeepsStateContinuous)
{
  const ReferenceModel m = build_paper_reference();
  ReferenceState s{Vec2(0.9979, 0.5), 0};
  const ReferenceState next = reference_step(m, s, 0.0, 1e-3);
  // one step with the soft dynamics; only A_m changes at the switch
  const Vec2 expected = oracle::forced_response(a_m1(), kB, 0.0, s.delta_m, 1e-3);
  EXPECT_NEAR(next.delta_m(0), expected(0), 1e-13);
  EXPECT_EQ(next.active_region, 1u);
}

TEST(ReferenceStep, SoftSubsystemTrajectory)
{
  const ReferenceModel m = single(a_m1());
  const Vec2 got = integrate(m, Vec2(0.2, -0.1), 3.0, 2.0, 1e-3);
  const Vec2 exact = oracle::forced_response(a_m1(), kB, 3.0, Vec2(0.2, -0.1), 2.0);
  EXPECT_LT((got - exact).norm(), 1e-10);
}

TEST(ReferenceStep, NonFiniteInputRejected)
{
  const ReferenceModel m = build_paper_reference();
  EXPECT_THROW(reference_step(m, ReferenceState{}, std::nan(""), 1e-3), AdmitError);
}
