#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cartan/geometry.hpp"

namespace cartan {

struct GeodesicSpec {
  Geometry geometry;
  BundlePoint base;
  Vector direction;  // m-coordinates
  double t0 = 0.0;
  double t1 = 1.0;
  double step = 1e-2;
};

enum class TraceStatus { Completed, BlowUp, LeftChart };

struct TraceSample {
  double t = 0.0;
  Vector base;
  Matrix frame;
  Vector velocity_m;
};

struct Trace {
  std::vector<TraceSample> samples;
  TraceStatus status = TraceStatus::Completed;
  double t_stop = 0.0;  // escape or exit time when status is not Completed

  /// "Completed", "BlowUp:t=..." or "LeftChart:t=...".
  std::string status_string() const;
};

/// Mutation models: the exact lift p exp(t sigma^{-1} X) sampled every
/// `step`. Gauge models: RK4 on xdot = theta^{-1}(Ad_h X)_m,
/// hdot = -A_x(xdot)_h h with step halving on failure.
Trace geodesic(const GeodesicSpec& spec);

/// A curve in the bundle with its omega-velocity.
struct LiftedCurve {
  std::function<BundlePoint(double)> point;
  std::function<AlgebraVector(double)> velocity;
  double t_min = 0.0;
  double t_max = 1.0;
};

/// t -> p exp(t sigma^{-1} X) for X in m.
LiftedCurve geodesic_lift(const MutationGeometry& geometry, const Matrix& base, const Vector& x_m);

/// t -> p exp(t sigma^{-1} X) exp(t sigma^{-1} Y) for X in m, Y in h: the
/// same geodesic with a rotating frame.
LiftedCurve twisted_geodesic_lift(const MutationGeometry& geometry, const Matrix& base, const Vector& x_m,
                                  const Vector& y_h);

/// t -> p exp(sigma^{-1} f(t)) with omega-velocity sigma(phi1(-ad F) F').
LiftedCurve exp_path(const MutationGeometry& geometry, const Matrix& base, std::function<AlgebraVector(double)> f,
                     std::function<AlgebraVector(double)> f_prime, double t_min, double t_max);

/// The section lift (x(t), identity) of a chart curve.
LiftedCurve chart_lift(const GaugeGeometry& gauge, std::function<Vector(double)> x,
                       std::function<Vector(double)> x_prime, double t_min, double t_max);

/// Solves Y' = [Y, omega_h(c'(t))]_m with RK4 from Y(t0) = v; t1 < t0 runs
/// backwards. Throws DomainError outside the curve's interval.
Vector parallel_transport(const Geometry& geometry, const LiftedCurve& curve, const Vector& v, double t0, double t1,
                          double step);

/// Development in the model group: g' = g mat(omega(c')), g(t0) = I, RK4
/// with one projection step per step.
Trace develop(const Geometry& geometry, const LiftedCurve& curve, double t0, double t1, double step);

/// Base-point coordinates of a model-group element.
Vector model_base_coords(const Geometry& geometry, const Matrix& g);

struct JacobiState {
  Vector j;
  Vector j_prime;
};

struct JacobiSample {
  double t = 0.0;
  JacobiState state;
  Vector oracle;  // empty when the variation oracle is off
};

struct JacobiTrace {
  std::vector<JacobiSample> samples;
  double max_discrepancy = 0.0;
};

/// Right-hand side J'' for the Jacobi equation along a horizontal geodesic
/// lift with constant omega_m-velocity X.
Vector jacobi_acceleration(const MutationGeometry& geometry, const Vector& x, const JacobiState& state);

/// RK4 on the Jacobi equation along the geodesic of `spec` (mutation models).
/// With `oracle`, also differentiates the family of geodesics
/// p e^{s eta} e^{t(xi + s zeta)} at s = 0 with step 1e-4.
JacobiTrace jacobi_field(const GeodesicSpec& spec, const JacobiState& init, double step, bool oracle = true);

void write_trace_csv(std::ostream& out, const Trace& trace);
Trace read_trace_csv(std::istream& in);
void write_jacobi_csv(std::ostream& out, const JacobiTrace& trace);

}  // namespace cartan
