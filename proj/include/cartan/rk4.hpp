#pragma once

#include <type_traits>

#include <Eigen/Dense>

namespace cartan {

/// Chart point plus fiber element; the state of gauge-side integrations.
struct ChartState {
  Eigen::VectorXd x;
  Eigen::MatrixXd h;
};

inline ChartState operator+(const ChartState& a, const ChartState& b) { return {a.x + b.x, a.h + b.h}; }
inline ChartState operator*(double s, const ChartState& a) { return {s * a.x, s * a.h}; }

/// One classical Runge-Kutta step for y' = f(t, y). State must support
/// `+` and scalar `*`.
template <class State, class F>
State rk4_step(const F& f, double t, const State& y, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
  const State k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
  const State k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fourth-order central difference of a vector-valued function of one
/// variable at 0.
template <class F>
auto central_difference(const F& f, double h) {
  using Result = std::decay_t<decltype(f(h))>;
  const Result p1 = f(h), m1 = f(-h), p2 = f(2.0 * h), m2 = f(-2.0 * h);
  return Result((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h));
}

}  // namespace cartan
