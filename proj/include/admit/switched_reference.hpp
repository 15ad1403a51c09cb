#pragma once

#include "admit/linalg.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace admit {

/// One linear reference subsystem  d/dt dm = A_m dm + B_m r.
class Subsystem
{
 public:
  /// Throws AdmitError(not_hurwitz) unless A_m is Hurwitz.
  Subsystem(const Mat2& a_m, const Vec2& b_m);

  const Mat2& a_m() const { return a_m_; }
  const Vec2& b_m() const { return b_m_; }

  Vec2 derivative(const Vec2& delta_m, double r) const { return a_m_ * delta_m + b_m_ * r; }

 private:
  Mat2 a_m_;
  Vec2 b_m_;
};

/// A row h of  h [dm; 1] <= 0  (or < 0 when strict).
struct HalfSpace
{
  Eigen::RowVector3d h = Eigen::RowVector3d::Zero();
  bool strict = false;

  bool contains(const Vec2& delta_m) const;
};

/// Convex cell of the partition. Several polyhedra may share one subsystem,
/// e.g. the two outer slabs of a symmetric threshold.
struct Polyhedron
{
  std::vector<HalfSpace> rows;
  std::size_t subsystem = 0;

  bool contains(const Vec2& delta_m) const;
};

class Partition
{
 public:
  Partition() = default;
  Partition(std::vector<Polyhedron> cells, std::size_t subsystem_count);

  /// Inner cell |dm1| <= threshold -> subsystem 0, outer cells -> subsystem 1.
  /// The boundary belongs to the inner (nonstrict) side.
  static Partition symmetric_threshold(double threshold);

  /// A single unconstrained cell mapped to subsystem 0.
  static Partition whole_space();

  /// Index of the subsystem whose region contains delta_m.
  /// Throws AdmitError(uncovered_state) when no cell contains it and
  /// AdmitError(invalid_config) when cells of different subsystems overlap.
  std::size_t indicator(const Vec2& delta_m) const;

  /// Number of distinct subsystems whose regions contain delta_m (1 for a
  /// well-formed partition). Used by the per-run audit.
  std::size_t covering_count(const Vec2& delta_m) const;

  const std::vector<Polyhedron>& cells() const { return cells_; }
  std::size_t subsystem_count() const { return subsystem_count_; }

 private:
  std::vector<Polyhedron> cells_;
  std::size_t subsystem_count_ = 0;
};

struct ReferenceModel
{
  std::vector<Subsystem> subsystems;
  Partition partition;

  std::vector<Mat2> state_matrices() const;
};

struct ReferenceState
{
  Vec2 delta_m = Vec2::Zero();
  std::size_t active_region = 0;  // zero-based subsystem index
};

/// One RK4 step with the subsystem active at step start. The state carries over
/// unchanged across switches; only A_m changes. Throws AdmitError(nonfinite_state).
ReferenceState reference_step(const ReferenceModel& model, const ReferenceState& state, double r, double dt);

/// Safety limit 1 m with a 0.2 % hardware tolerance.
inline constexpr double kDefaultSafetyLimit = 1.0;
inline constexpr double kDefaultToleranceFraction = 0.002;

/// Soft subsystem A_m1 = [0 1; -5 -9], stiff A_m2 = [0 1; -20 -25],
/// B_m = [0; 1], threshold 0.998 on |dm1|.
ReferenceModel build_paper_reference();

}  // namespace admit
