#pragma once

#include <Eigen/Core>

namespace admit {

/// One classical Runge-Kutta step of x' = f(x) for an autonomous right-hand
/// side. Time-dependent inputs are held over the step by the caller.
template <typename State, typename Rhs>
State rk4_step(const State& x, double dt, Rhs&& f)
{
  const State k1 = f(x);
  const State k2 = f(State(x + (0.5 * dt) * k1));
  const State k3 = f(State(x + (0.5 * dt) * k2));
  const State k4 = f(State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace admit
