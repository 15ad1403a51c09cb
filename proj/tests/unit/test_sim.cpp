#include "admit/error.hpp"
#include "admit/sim.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace admit;

namespace {

ScenarioConfig short_run(double duration)
{
  ScenarioConfig c = paper_scenario();
  c.duration = duration;
  return c;
}

}  // namespace

TEST(Simulation, OperatingPointAndInitialRecord)
{
  Simulation sim(paper_scenario());
  // x_op = phi(pi/12, 5 pi/6): x = 0.85 (cos 15deg + cos 165deg) = 0
  EXPECT_NEAR(sim.operating_point()(0), 0.0, 1e-15);
  EXPECT_NEAR(sim.operating_point()(1), 0.85 * (std::sin(std::numbers::pi / 12) + std::sin(11 * std::numbers::pi / 12)),
              1e-15);
  const TraceRecord r = sim.observe(Vec2(25.0, -3.0));
  EXPECT_EQ(r.f_ext, Vec2(20.0, -3.0));
  EXPECT_EQ(r.x_dev, Vec2::Zero());
  EXPECT_EQ(r.axes[0].region, 0u);
  EXPECT_EQ(sim.step_index(), 0u);
}

TEST(Simulation, RefusesUncertifiedFamily)
{
  ScenarioConfig c = paper_scenario();
  c.lyapunov_p = (Mat2() << 1, 0, 0, -1).finished();
  try
  {
    Simulation sim(c);
    FAIL() << "expected no_cqlf";
  }
  catch (const AdmitError& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::no_cqlf);
  }
  const ScenarioResult r = run_scenario(c);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.abort->kind, ErrorKind::no_cqlf);
  EXPECT_EQ(r.abort->step, 0u);
}

TEST(Simulation, SearchesWhenNoMatrixGiven)
{
  ScenarioConfig c = short_run(0.1);
  c.lyapunov_p.reset();
  const ScenarioResult r = run_scenario(c);
  ASSERT_TRUE(r.ok());
  ASSERT_TRUE(r.certificate.has_value());
  EXPECT_GE(r.certificate->iterations, 1);
}

TEST(Simulation, SingularStartAbortsWithStep)
{
  ScenarioConfig c = short_run(0.1);
  c.q0 = Vec2(0.3, 0.0);
  const ScenarioResult r = run_scenario(c);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.abort->kind, ErrorKind::invalid_config);
  EXPECT_NE(r.abort->detail.find("singular"), std::string::npos);
  EXPECT_EQ(r.abort->step, 0u);
}

TEST(Simulation, DrivenIntoWorkspaceBoundaryAborts)
{
  // 20 N along +y asks for a 4 m excursion in the soft region; the arm
  // reaches full stretch and the run stops at that step
  ScenarioConfig c = short_run(10.0);
  c.subsystems.resize(1);
  c.gamma_diagonals.resize(1);
  c.partition.kind = PartitionSpec::Kind::whole_space;
  c.lyapunov_p.reset();
  c.force.kind = ForceProfile::Kind::constant;
  c.force.amplitude = Vec2(0.0, 20.0);
  const ScenarioResult r = run_scenario(c);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(r.abort->kind == ErrorKind::singular || r.abort->kind == ErrorKind::nonfinite_state);
  EXPECT_GT(r.abort->step, 0u);
  EXPECT_EQ(r.trace.rows.size(), r.abort->step);
}

TEST(Simulation, DefaultScenarioMetrics)
{
  const ScenarioResult r = run_scenario(paper_scenario());
  ASSERT_TRUE(r.ok()) << r.abort->detail;
  const RunMetrics& m = r.metrics;
  EXPECT_EQ(m.steps, 60001u);
  EXPECT_DOUBLE_EQ(m.duration, 60.0);
  // frozen from this implementation, cross-checked against an independent
  // prototype integration to 1e-5
  EXPECT_NEAR(m.max_abs_delta1[0], 1.00498, 1e-5);
  EXPECT_NEAR(m.max_abs_delta1[1], 1.00466, 1e-5);
  EXPECT_NEAR(m.max_abs_delta_m1[0], 1.00062, 1e-5);
  EXPECT_NEAR(m.max_tracking_error, 4.16e-4, 1e-5);
  EXPECT_NEAR(m.max_torque, 26.670, 1e-3);
  EXPECT_NEAR(m.min_abs_det_j, 0.36125, 1e-5);
  EXPECT_GT(m.switch_count[0], 0u);
  EXPECT_TRUE(m.audit.passed());
  EXPECT_LT(m.audit.max_lyapunov_increase, 1e-9);
}

TEST(Simulation, TrackingFollowsAdmittanceOutput)
{
  const ScenarioResult r = run_scenario(short_run(5.0));
  ASSERT_TRUE(r.ok());
  for (const auto& row : r.trace.rows)
  {
    const Vec2 x_r(row.axes[0].delta(0), row.axes[1].delta(0));
    ASSERT_LT((row.x_dev - x_r).norm(), 1e-3) << "t = " << row.t;
  }
}

TEST(Simulation, ZeroForceIsStationary)
{
  ScenarioConfig c = short_run(2.0);
  c.force.amplitude = Vec2::Zero();
  c.manipulator.gravity_enabled = true;
  const ScenarioResult r = run_scenario(c);
  ASSERT_TRUE(r.ok());
  for (const auto& row : r.trace.rows) ASSERT_LT(row.x_dev.norm(), 1e-12);
}

TEST(Simulation, Deterministic)
{
  const ScenarioResult a = run_scenario(short_run(3.0));
  const ScenarioResult b = run_scenario(short_run(3.0));
  ASSERT_EQ(a.trace.rows.size(), b.trace.rows.size());
  for (std::size_t k = 0; k < a.trace.rows.size(); ++k)
  {
    ASSERT_EQ(a.trace.rows[k].q, b.trace.rows[k].q);
    ASSERT_EQ(a.trace.rows[k].axes[1].k_x, b.trace.rows[k].axes[1].k_x);
  }
}

TEST(Audit, DetectsTamperedGains)
{
  ScenarioResult r = run_scenario(short_run(2.0));
  ASSERT_TRUE(r.ok());
  const ScenarioConfig c = short_run(2.0);
  EXPECT_TRUE(run_audits(r.trace, c, *r.certificate).passed());
  r.trace.rows[500].axes[0].k_x[1] += Row2(3.0, 0.0);
  const AuditReport rep = run_audits(r.trace, c, *r.certificate);
  EXPECT_GT(rep.lyapunov_violations, 0u);
  EXPECT_GT(rep.linearization_violations + rep.lyapunov_violations, 0u);
}

TEST(Audit, SkewResidualSmallAlongTrajectory)
{
  const TwoLinkParams p;
  const JointState s{Vec2(0.4, 1.9), Vec2(0.8, -1.1)};
  EXPECT_LT(std::abs(skew_symmetry_residual(p, s)), 1e-6);
}

TEST(Realtime, ClampsAndRecordsAtFullRate)
{
  ScenarioConfig c = paper_scenario();
  c.live.trace_capacity_steps = 100;
  RealtimeSession s(c);
  StateSnapshot snap;
  for (int k = 0; k < 300; ++k) snap = step_realtime(s, Vec2(25.0, 0.0), c.dt);
  EXPECT_EQ(snap.record.f_ext, Vec2(20.0, 0.0));
  EXPECT_GE(s.trace().rows.size(), 100u);
  EXPECT_LE(s.trace().rows.size(), 125u);
  EXPECT_EQ(s.trace().rows.back().step, 299u);
  EXPECT_THROW(step_realtime(s, Vec2::Zero(), 2e-3), AdmitError);
}

TEST(Realtime, ResetRestoresStateAndKeepsTimeMonotone)
{
  RealtimeSession s(paper_scenario());
  for (int k = 0; k < 2000; ++k) step_realtime(s, Vec2(20.0, 0.0), 1e-3);
  const double before = s.session_time();
  s.reset();
  EXPECT_EQ(s.epoch(), 1u);
  EXPECT_DOUBLE_EQ(s.session_time(), before);
  const StateSnapshot snap = step_realtime(s, Vec2::Zero(), 1e-3);
  EXPECT_EQ(snap.record.step, 0u);
  EXPECT_EQ(snap.record.q, paper_scenario().q0);
  EXPECT_EQ(snap.record.axes[0].k_x[1], Row2(-5.0, -9.0));
  EXPECT_DOUBLE_EQ(snap.session_time, before);
  EXPECT_EQ(snap.epoch, 1u);
}

TEST(Realtime, SafetyFlagFollowsRegion)
{
  RealtimeSession s(paper_scenario());
  bool flagged = false;
  for (int k = 0; k < 3000 && !flagged; ++k)
  {
    const StateSnapshot snap = step_realtime(s, Vec2(20.0, 0.0), 1e-3);
    const bool beyond = std::abs(snap.record.axes[0].delta_m(0)) > 0.998;
    EXPECT_EQ(snap.safety_flag, beyond);
    flagged = snap.safety_flag;
  }
  EXPECT_TRUE(flagged);
}
