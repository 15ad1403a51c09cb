#pragma once

#include "admit/linalg.hpp"
#include "admit/switched_reference.hpp"

#include <cstddef>
#include <vector>

namespace admit {

/// Virtual mass-spring-damper  d/dt delta = A delta + B U  with B = [0; 1/M].
struct AdmittancePlant
{
  Mat2 A = Mat2::Zero();
  Vec2 B = Vec2(0.0, 1.0);
  Vec2 delta = Vec2::Zero();  // [position m, velocity m/s]

  double virtual_mass() const { return 1.0 / B(1); }
};

struct AdaptiveGains
{
  std::vector<Row2> k_x;    // one row per region
  std::vector<Mat2> gamma;  // positive diagonal adaptation rates per region
  double k_r = 1.0;
};

/// Which state selects the active region.
enum class SwitchSource
{
  reference,
  plant,
};

struct ChannelConfig
{
  Mat2 plant_a = (Mat2() << 0.0, 1.0, 0.0, 0.0).finished();
  double virtual_mass = 1.0;
  ReferenceModel reference;
  std::vector<Vec2> gamma_diagonals;     // per region
  std::vector<Row2> k_x0{Row2::Zero()};  // one row per region, or one row for all
  double f_max = 20.0;                   // N
  Mat2 P = Mat2::Identity();             // common Lyapunov matrix for the update law
  SwitchSource switch_source = SwitchSource::reference;
  bool adaptation_enabled = true;
  Vec2 delta0 = Vec2::Zero();
  Vec2 delta_m0 = Vec2::Zero();
};

struct ChannelState
{
  AdmittancePlant plant;
  ReferenceState reference;
  AdaptiveGains gains;

  Vec2 mrac_error() const { return plant.delta - reference.delta_m; }
};

/// U = K_x[region] delta + K_r r.
double control_input(const AdaptiveGains& gains, std::size_t region, const Vec2& delta, double r);

/// K*_i such that A_mi = A + B K*_i. Throws AdmitError(unmatchable) when the
/// first rows of A_mi and A differ, since B has a zero first entry.
Row2 nominal_gains(const Mat2& A, const Vec2& B, const Mat2& A_mi);

/// Rate of the active region's gain row: (K_dot)^T = -Gamma delta (e^T P B).
Row2 gain_rate(const Mat2& gamma, const Vec2& delta, const Vec2& error, const Mat2& P, const Vec2& B);

/// Advances only the active region's gains over dt with delta and e frozen.
/// channel_step integrates the same law jointly with the states.
AdaptiveGains gain_update(const ChannelState& channel, std::size_t active_region, const Mat2& P, double dt);

/// V = 1/2 e^T P e + 1/2 sum_i (K_i - K*_i) Gamma_i^-1 (K_i - K*_i)^T.
double lyapunov_value(const Vec2& error, const std::vector<Row2>& k_x, const std::vector<Row2>& nominal,
                      const std::vector<Mat2>& gamma, const Mat2& P);

/// One Cartesian axis of the switched model-reference admittance layer.
class AdmittanceChannel
{
 public:
  /// Validates matching conditions, adaptation rates and f_max.
  /// Throws AdmitError(invalid_config | unmatchable).
  explicit AdmittanceChannel(ChannelConfig config);

  /// One coupled RK4 step of {delta, delta_m, K_x(active)}; the region is
  /// evaluated at step start and the force is clamped to +-f_max.
  /// Throws AdmitError(nonfinite_state).
  void step(double force, double dt);

  /// Region that the next step will use.
  std::size_t active_region() const;

  double clamp_force(double force) const;

  /// delta_dot at the current state for input r (region from active_region()).
  Vec2 plant_derivative(double r) const;

  double lyapunov_value() const;

  void reset();

  const ChannelState& state() const { return state_; }
  const ChannelConfig& config() const { return config_; }
  const std::vector<Row2>& nominal() const { return nominal_; }

 private:
  ChannelConfig config_;
  ChannelState state_;
  std::vector<Row2> nominal_;
};

}  // namespace admit
