// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "admit/admittance_mrac.hpp"
#include "admit/cqlf.hpp"
#include "admit/manipulator.hpp"
#include "admit/scenario_config.hpp"
#include "admit/sim.hpp"
#include "admit/trace_io.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <variant>

using namespace admit;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail)
{
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScenarioConfig config_file(const char* name)
{
  return load_config(std::filesystem::path(ADMIT_CONFIG_DIR) / name);
}

Mat2 mat(double a, double b, double c, double d)
{
  return (Mat2() << a, b, c, d).finished();
}

void certificate_check()
{
  // hand products: A1^T P + P A1 with P = [8.16 2.22; 2.22 3.90]
  //   A1^T P = [-11.1 -19.5; -11.82 -32.88], sum = [-22.2 -31.32; -31.32 -65.76]
  //   A2^T P = [-44.4 -78.0; -56.34 -95.28], sum = [-88.8 -125.34; -125.34 -190.56]
  const Mat2 s1 = mat(-22.2, -31.32, -31.32, -65.76);
  const Mat2 s2 = mat(-88.8, -125.34, -125.34, -190.56);
  const std::vector<Mat2> family{mat(0, 1, -5, -9), mat(0, 1, -20, -25)};
  const Mat2 P = mat(8.16, 2.22, 2.22, 3.90);

  const oracle::Stopwatch cold_clock;
  const VerifyResult v = verify_cqlf(family, P);
  const double cold = cold_clock.seconds();
  // the first call also pays for page faults and lazy symbol binding
  const int reps = 1000;
  const oracle::Stopwatch clock;
  for (int i = 0; i < reps; ++i)
    if (!std::holds_alternative<CqlfCertificate>(verify_cqlf(family, P))) break;
  const double elapsed = clock.seconds() / reps;

  const auto* cert = std::get_if<CqlfCertificate>(&v);
  bool pass = cert != nullptr && elapsed < 1e-3;
  double diff = INFINITY;
  if (cert)
  {
    diff = std::max((cert->q_matrices[0] + s1).cwiseAbs().maxCoeff(), (cert->q_matrices[1] + s2).cwiseAbs().maxCoeff());
    const bool negdef = oracle::symmetric_eigenvalues(s1)(1) < 0 && oracle::symmetric_eigenvalues(s2)(1) < 0;
    pass = pass && negdef && diff < 1e-12;
  }
  report(1, pass,
         fmt("verify_cqlf on P = [8.16 2.22; 2.22 3.90]: %s, |sum - hand| = %.2e, max eig %.4f / %.4f, %.4f ms per "
             "call (first "
             "call %.3f ms)",
             cert ? "certified" : "rejected", diff, cert ? cert->margins[0] : NAN, cert ? cert->margins[1] : NAN,
             elapsed * 1e3, cold * 1e3));
}

void safety_check(const ScenarioResult& base, double base_seconds)
{
  const ScenarioConfig single = config_file("region1_only.json");
  const ScenarioResult r1 = run_scenario(single);

  // steady-state amplitude of dd + 9 d + 5 d = 7.5 sin(0.5 t)
  const double w = 0.5;
  const double oracle_amp = 7.5 / std::abs(std::complex<double>(5.0 - w * w, 9.0 * w));
  double late = 0.0, overall = 0.0;
  for (const auto& row : r1.trace.rows)
  {
    const double m = std::max(std::abs(row.axes[0].delta(0)), std::abs(row.axes[1].delta(0)));
    overall = std::max(overall, m);
    if (row.t >= 40.0) late = std::max(late, m);
  }
  const double bound = 1.0 + 2e-3;
  const auto& m = base.metrics;
  const bool bounded = base.ok() && m.max_abs_delta1[0] <= bound && m.max_abs_delta1[1] <= bound;
  const bool counterfactual = r1.ok() && overall > 1.0 && std::abs(late - oracle_amp) <= 0.02 * oracle_amp;
  report(2, bounded && counterfactual && base_seconds < 10.0,
         fmt("max|delta1| x %.5f y %.5f m (bound %.3f), reference max|delta_m1| %.5f; region-1-only late amplitude "
             "%.5f vs %.5f +-2%%, peak %.4f; %.2f s",
             m.max_abs_delta1[0], m.max_abs_delta1[1], bound, std::max(m.max_abs_delta_m1[0], m.max_abs_delta_m1[1]),
             late, oracle_amp, overall, base_seconds));
}

double pinned_decay_rate(ChannelConfig cfg)
{
  cfg.adaptation_enabled = false;
  cfg.delta0 = Vec2(0.5, 0.0);
  AdmittanceChannel ch(cfg);
  double e5 = 0.0;
  for (int k = 0; k < 15000; ++k)
  {
    if (k == 5000) e5 = ch.state().mrac_error().norm();
    ch.step(0.0, 1e-3);
  }
  return std::log(ch.state().mrac_error().norm() / e5) / 10.0;
}

double slowest_rate(const Mat2& a)
{
  const auto lam = eigenvalues(a);
  return std::max(lam[0].real(), lam[1].real());
}

void lyapunov_check(const ScenarioResult& base)
{
  const double dv = base.metrics.audit.max_lyapunov_increase;
  const bool audit_ok = base.ok() && dv <= 1e-6 && base.metrics.audit.lyapunov_violations == 0;

  // switched family with every region pinned to its nominal gains; no force
  // keeps the reference at the origin, so region 1 stays active
  ScenarioConfig sw = paper_scenario();
  sw.k_x0 = {Row2(-5.0, -9.0), Row2(-20.0, -25.0)};
  const double r1 = pinned_decay_rate(sw.channel_config(*sw.lyapunov_p));
  const double s1 = slowest_rate(sw.subsystems[0]);

  ScenarioConfig stiff = config_file("subsystem2_step.json");
  stiff.k_x0 = {Row2(-20.0, -25.0)};
  const CqlfCertificate c2 = certify_config(stiff);
  const double r2 = pinned_decay_rate(stiff.channel_config(c2.P));
  const double s2 = slowest_rate(stiff.subsystems[0]);

  const bool decay_ok = std::abs(r1 - s1) <= 0.05 * std::abs(s1) && std::abs(r2 - s2) <= 0.05 * std::abs(s2);
  report(3, audit_ok && decay_ok,
         fmt("max per-step dV %.3e (%zu violations); pinned decay %.5f vs %.5f (A_m1), %.5f vs %.5f (A_m2)", dv,
             base.metrics.audit.lyapunov_violations, r1, s1, r2, s2));
}

void steady_state_check()
{
  const ScenarioConfig cfg = config_file("subsystem2_step.json");
  const ScenarioResult r = run_scenario(cfg);
  const std::size_t k5 = static_cast<std::size_t>(std::llround(5.0 / cfg.dt));
  double at5 = NAN, settle = NAN;
  if (r.trace.rows.size() > k5) at5 = r.trace.rows[k5].axes[0].delta(0);
  for (std::size_t k = r.trace.rows.size(); k-- > 0;)
  {
    if (std::abs(r.trace.rows[k].axes[0].delta(0) - 1.0) > 0.01) break;
    settle = r.trace.rows[k].t;
  }
  const Vec2 analytic = oracle::forced_response(cfg.subsystems[0], Vec2(0.0, 1.0), 20.0, Vec2::Zero(), 5.0);
  report(4, r.ok() && std::abs(at5 - 1.0) <= 0.01,
         fmt("subsystem-2 channel under 20 N: delta1(5 s) = %.6f m (analytic %.6f), enters the 1%% band at %.3f s", at5,
             analytic(0), settle));
}

void torque_check(const ScenarioResult& base)
{
  report(5, base.ok() && base.metrics.max_torque <= 30.0,
         fmt("max |tau| = %.4f N m (bound 30)", base.metrics.max_torque));
}

void invariant_check(const ScenarioResult& base)
{
  const oracle::Stopwatch clock;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ang(-3.1, 3.1);
  TwoLinkParams p;

  double jac = 0.0;
  for (int i = 0; i < 100; ++i)
  {
    const Vec2 q(ang(rng), ang(rng));
    jac = std::max(jac, (jacobian(p, q) - oracle::fd_jacobian(p.l1, p.l2, q)).cwiseAbs().maxCoeff());
  }

  double skew = 0.0;
  JointState s{Vec2(0.4, 1.2), Vec2(1.0, -0.5)};
  p.gravity_enabled = true;
  const double e0 = oracle::arm_energy(p.m1, p.m2, p.l1, p.l2, p.g, s.q, s.qdot);
  double energy = 0.0;
  for (int k = 0; k < 1000; ++k)
  {
    skew = std::max(skew, std::abs(skew_symmetry_residual(p, s)) / (1.0 + s.qdot.squaredNorm()));
    s = apply_torque(p, s, Vec2::Zero(), Vec2::Zero(), 1e-3);
    energy = std::max(energy, std::abs(oracle::arm_energy(p.m1, p.m2, p.l1, p.l2, p.g, s.q, s.qdot) - e0) / e0);
  }
  const TwoLinkParams plane = paper_scenario().manipulator;
  for (std::size_t k = 0; k < base.trace.rows.size(); k += 10)
  {
    const auto& row = base.trace.rows[k];
    skew = std::max(skew, std::abs(skew_symmetry_residual(plane, {row.q, row.qdot})) / (1.0 + row.xdot.squaredNorm()));
  }

  double lyap = 0.0;
  for (int i = 0; i < 1000; ++i)
  {
    const Mat2 A = oracle::random_hurwitz(rng);
    const Mat2 P = solve_lyapunov(A, Mat2::Identity());
    lyap = std::max(lyap, (A.transpose() * P + P * A + Mat2::Identity()).cwiseAbs().maxCoeff());
  }
  const double elapsed = clock.seconds();
  report(6, jac < 1e-6 && skew < 1e-6 && energy < 1e-6 && lyap < 1e-10 && elapsed < 5.0,
         fmt("jacobian %.2e, skew %.2e, energy drift %.2e, lyapunov residual %.2e; %.3f s", jac, skew, energy, lyap,
             elapsed));
}

std::string trace_bytes(const ScenarioConfig& cfg)
{
  std::ostringstream os;
  write_trace_csv(os, run_scenario(cfg).trace);
  return os.str();
}

void determinism_check()
{
  const ScenarioConfig cfg = config_file("paper_scenario.json");
  const std::string a = trace_bytes(cfg);
  const std::string b = trace_bytes(cfg);
  report(7, !a.empty() && a == b,
         fmt("two paper_scenario runs, trace.csv %zu bytes, %s", a.size(), a == b ? "identical" : "differ"));
}

}  // namespace

int main()
{
  try
  {
    certificate_check();
    const oracle::Stopwatch clock;
    const ScenarioResult base = run_scenario(config_file("paper_scenario.json"));
    const double base_seconds = clock.seconds();
    safety_check(base, base_seconds);
    lyapunov_check(base);
    steady_state_check();
    torque_check(base);
    invariant_check(base);
    determinism_check();
  }
  catch (const std::exception& e)
  {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
