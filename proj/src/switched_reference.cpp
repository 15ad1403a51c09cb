#include "admit/switched_reference.hpp"

#include "admit/error.hpp"
#include "admit/rk4.hpp"

#include <cmath>
#include <sstream>

namespace admit {

Subsystem::Subsystem(const Mat2& a_m, const Vec2& b_m) : a_m_(a_m), b_m_(b_m)
{
  if (!is_hurwitz(a_m))
  {
    std::ostringstream os;
    os << "reference subsystem matrix is not Hurwitz (trace " << a_m.trace() << ", det " << a_m.determinant() << ")";
    throw AdmitError(ErrorKind::not_hurwitz, os.str());
  }
  if (!b_m.allFinite()) throw AdmitError(ErrorKind::invalid_config, "reference input matrix B_m is not finite");
}

bool HalfSpace::contains(const Vec2& d) const
{
  const double v = h(0) * d(0) + h(1) * d(1) + h(2);
  return strict ? v < 0.0 : v <= 0.0;
}

bool Polyhedron::contains(const Vec2& d) const
{
  for (const auto& row : rows)
    if (!row.contains(d)) return false;
  return true;
}

Partition::Partition(std::vector<Polyhedron> cells, std::size_t subsystem_count)
    : cells_(std::move(cells)), subsystem_count_(subsystem_count)
{
  if (cells_.empty()) throw AdmitError(ErrorKind::invalid_config, "partition: no regions");
  for (std::size_t i = 0; i < cells_.size(); ++i)
  {
    if (cells_[i].subsystem >= subsystem_count_)
    {
      std::ostringstream os;
      os << "partition.regions[" << i << "]: subsystem index out of range";
      throw AdmitError(ErrorKind::invalid_config, os.str());
    }
    for (const auto& row : cells_[i].rows)
      if (!row.h.allFinite()) throw AdmitError(ErrorKind::invalid_config, "partition: non-finite half-space row");
  }
}

Partition Partition::symmetric_threshold(double threshold)
{
  if (!(threshold > 0.0)) throw AdmitError(ErrorKind::invalid_config, "partition threshold must be positive");
  Polyhedron inner;
  inner.subsystem = 0;
  inner.rows.push_back({Eigen::RowVector3d(1.0, 0.0, -threshold), false});
  inner.rows.push_back({Eigen::RowVector3d(-1.0, 0.0, -threshold), false});

  Polyhedron upper;
  upper.subsystem = 1;
  upper.rows.push_back({Eigen::RowVector3d(-1.0, 0.0, threshold), true});

  Polyhedron lower;
  lower.subsystem = 1;
  lower.rows.push_back({Eigen::RowVector3d(1.0, 0.0, threshold), true});

  return Partition({inner, upper, lower}, 2);
}

Partition Partition::whole_space()
{
  Polyhedron all;
  all.subsystem = 0;
  return Partition({all}, 1);
}

std::size_t Partition::indicator(const Vec2& d) const
{
  std::size_t found = subsystem_count_;
  for (const auto& cell : cells_)
  {
    if (!cell.contains(d)) continue;
    if (found != subsystem_count_ && found != cell.subsystem)
    {
      std::ostringstream os;
      os << "partition regions overlap at dm=[" << d(0) << ", " << d(1) << "]";
      throw AdmitError(ErrorKind::invalid_config, os.str());
    }
    found = cell.subsystem;
  }
  if (found == subsystem_count_)
  {
    std::ostringstream os;
    os << "no partition region contains dm=[" << d(0) << ", " << d(1) << "]";
    throw AdmitError(ErrorKind::uncovered_state, os.str());
  }
  return found;
}

std::size_t Partition::covering_count(const Vec2& d) const
{
  std::vector<bool> hit(subsystem_count_, false);
  for (const auto& cell : cells_)
    if (cell.contains(d)) hit[cell.subsystem] = true;
  std::size_t n = 0;
  for (bool b : hit) n += b ? 1 : 0;
  return n;
}

std::vector<Mat2> ReferenceModel::state_matrices() const
{
  std::vector<Mat2> out;
  out.reserve(subsystems.size());
  for (const auto& s : subsystems) out.push_back(s.a_m());
  return out;
}

ReferenceState reference_step(const ReferenceModel& model, const ReferenceState& state, double r, double dt)
{
  if (!std::isfinite(r) || !state.delta_m.allFinite())
    throw AdmitError(ErrorKind::nonfinite_state, "non-finite reference state or input");
  const std::size_t region = model.partition.indicator(state.delta_m);
  const Subsystem& sub = model.subsystems.at(region);
  ReferenceState next;
  next.delta_m = rk4_step(state.delta_m, dt, [&](const Vec2& d) { return sub.derivative(d, r); });
  if (!next.delta_m.allFinite()) throw AdmitError(ErrorKind::nonfinite_state, "reference state diverged");
  next.active_region = model.partition.indicator(next.delta_m);
  return next;
}

ReferenceModel build_paper_reference()
{
  Mat2 a1;
  a1 << 0.0, 1.0, -5.0, -9.0;
  Mat2 a2;
  a2 << 0.0, 1.0, -20.0, -25.0;
  const Vec2 b(0.0, 1.0);
  ReferenceModel model;
  model.subsystems = {Subsystem(a1, b), Subsystem(a2, b)};
  model.partition = Partition::symmetric_threshold(kDefaultSafetyLimit * (1.0 - kDefaultToleranceFraction));
  return model;
}

}  // namespace admit
