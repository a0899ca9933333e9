#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cartan/geometry.hpp"

namespace cartan {

struct CurvatureValue {
  Vector omega_m;  // torsion part
  Vector omega_h;

  AlgebraVector assemble(const ModelPair& model) const { return model.assemble(omega_m, omega_h); }
};

/// Omega(omega^{-1} X, omega^{-1} Y) at `point`.
CurvatureValue curvature(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& x,
                         const AlgebraVector& y);

/// Same on chart tangents of a gauge model: F = dA + [A, A] at x, with dA
/// from a fourth-order central difference.
AlgebraVector gauge_field_strength(const GaugeGeometry& gauge, const Vector& x, const Vector& u, const Vector& v,
                                   double step = 1e-4);

Vector torsion(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& x, const AlgebraVector& y);

struct ProbeReport {
  int n_samples = 0;
  std::uint64_t seed = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool constant = false;
  /// Largest |Omega| seen, useful to tell "constant" from "identically 0".
  double max_magnitude = 0.0;
};

/// Evaluates Omega on every pair of m-basis vectors at `n_samples` random
/// bundle points and compares all samples pairwise.
ProbeReport constant_curvature_probe(const Geometry& geometry, int n_samples, std::uint64_t seed,
                                     double tolerance = 1e-6);

/// A map from the bundle to m-coordinates. `constant` marks fields that do
/// not depend on the point, for which derivatives are taken in closed form.
struct EquivariantField {
  std::function<Vector(const BundlePoint&)> eval;
  std::optional<Vector> constant;

  Vector operator()(const BundlePoint& p) const;

  static EquivariantField constant_field(Vector value);
};

/// A seeded smooth H-equivariant field: (Ad_{p^{-1}} Z(b(p)))_m for mutation
/// models and (Ad_{h^{-1}} f(x))_m for gauge models, with Z, f built from
/// affine and trigonometric terms of the base coordinates.
EquivariantField smooth_field(const Geometry& geometry, std::uint64_t seed);

/// Largest |F(p h) - Ad_{h^{-1}} F(p)| over random samples.
double equivariance_residual(const Geometry& geometry, const EquivariantField& field, int n_samples,
                             std::uint64_t seed);

/// d/dt F(flow of omega^{-1}(xi) for time t) at t = 0, fourth-order stencil.
Vector field_derivative(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& xi,
                        const EquivariantField& field, double step = 1e-5);

/// Derivative term minus [F(p), xi_h], projected to m.
Vector covariant_derivative(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& xi,
                            const EquivariantField& field, double step = 1e-5);

/// |field_derivative along eta - [F(p), eta]_m| for a vertical eta in h.
double vertical_derivative_residual(const Geometry& geometry, const BundlePoint& point, const Vector& eta_h,
                              const EquivariantField& field, double step = 1e-5);

struct IdentitySides {
  Vector lhs;
  Vector rhs;
  double residual = 0.0;
};

struct IdentityReport {
  IdentitySides first;
  IdentitySides second;
  /// omega([X^, Y^]) at the point: by ambient differences and by the
  /// Maurer-Cartan formula.
  AlgebraVector commutator_fd;
  AlgebraVector commutator_formula;
};

/// Vector fields on the bundle through omega: value(q) = omega(X^)(q).
using BundleField = std::function<AlgebraVector(const Matrix&)>;

/// Both identities for lifts X^, Y^ (with omega(X^), omega(Y^) given as
/// functions on the ambient matrix space) and Z = omega_m(Z^). Mutation
/// geometries only. Nested derivatives use `step`.
IdentityReport check_structure_identities(const Geometry& geometry, const BundlePoint& point, const BundleField& x_lift,
                                          const BundleField& y_lift, const BundleField& z_field, double step = 1e-3);

/// Uses non-constant seeded lifts whose values at `point` are X, Y, Z.
IdentityReport check_structure_identities(const Geometry& geometry, const BundlePoint& point, const Vector& x,
                                          const Vector& y, const Vector& z, std::uint64_t seed = 1);

}  // namespace cartan
