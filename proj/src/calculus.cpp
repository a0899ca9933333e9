#include "cartan/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "cartan/error.hpp"
#include "cartan/rk4.hpp"

namespace cartan {

namespace {

Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Vector m_bracket(const ModelPair& model, const Vector& a_m, const AlgebraVector& b) {
  return model.m_part(bracket(model.algebra(), model.from_m(a_m), b));
}

}  // namespace

AlgebraVector gauge_field_strength(const GaugeGeometry& gauge, const Vector& x, const Vector& u, const Vector& v,
                                   double step) {
  const int d = gauge.chart_dim();
  const MatrixAlgebra& g = gauge.model().algebra();
  const Matrix a = gauge.connection(x);
  std::vector<Matrix> da(d);
  for (int i = 0; i < d; ++i)
    da[i] = central_difference([&](double s) { return Matrix(gauge.connection(x + s * Vector::Unit(d, i))); }, step);
  AlgebraVector out = AlgebraVector::Zero(g.dim());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double w = u[i] * v[j];
      if (w == 0.0) continue;
      out += w * (da[i].col(j) - da[j].col(i) + bracket(g, a.col(i), a.col(j)));
    }
  return out;
}

CurvatureValue curvature(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& x,
                         const AlgebraVector& y) {
  const ModelPair& model = geometry.model();
  model.algebra().check_dim(x);
  model.algebra().check_dim(y);
  AlgebraVector omega;
  if (const auto* m = geometry.mutation()) {
    omega = bracket(model.algebra(), x, y) - m->to_model(bracket(m->bundle_algebra(), m->to_bundle(x), m->to_bundle(y)));
  } else {
    const GaugeGeometry& gauge = *geometry.gauge();
    const Vector u = frame_tangent(geometry, point, x).dx;
    const Vector v = frame_tangent(geometry, point, y).dx;
    omega = adjoint(point.g.inverse(), gauge_field_strength(gauge, point.x, u, v), model.algebra());
  }
  return {model.m_part(omega), model.h_part(omega)};
}

Vector torsion(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& x, const AlgebraVector& y) {
  return curvature(geometry, point, x, y).omega_m;
}

ProbeReport constant_curvature_probe(const Geometry& geometry, int n_samples, std::uint64_t seed, double tolerance) {
  if (n_samples < 2) throw Error(ErrorKind::InvalidArgument, "constant_curvature_probe needs at least two samples");
  const ModelPair& model = geometry.model();
  const int dm = model.dim_m();
  Rng rng(seed);
  std::vector<Vector> samples;
  for (int s = 0; s < n_samples; ++s) {
    const BundlePoint p = random_point(geometry, rng);
    Vector all(model.dim() * dm * (dm - 1) / 2);
    int offset = 0;
    for (int i = 0; i < dm; ++i)
      for (int j = i + 1; j < dm; ++j) {
        const CurvatureValue c =
            curvature(geometry, p, model.from_m(Vector::Unit(dm, i)), model.from_m(Vector::Unit(dm, j)));
        all.segment(offset, model.dim()) = c.assemble(model);
        offset += model.dim();
      }
    samples.push_back(std::move(all));
  }
  ProbeReport report;
  report.n_samples = n_samples;
  report.seed = seed;
  report.tolerance = tolerance;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    if (samples[a].size() > 0) report.max_magnitude = std::max(report.max_magnitude, samples[a].cwiseAbs().maxCoeff());
    for (std::size_t b = a + 1; b < samples.size(); ++b)
      report.max_deviation = std::max(report.max_deviation, (samples[a] - samples[b]).norm());
  }
  report.constant = report.max_deviation <= tolerance;
  return report;
}

Vector EquivariantField::operator()(const BundlePoint& p) const {
  if (constant) return *constant;
  Vector out;
  try {
    out = eval(p);
  } catch (const Error& e) {
    throw Error(ErrorKind::FieldError, std::string("field evaluation failed: ") + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::FieldError, std::string("field evaluation failed: ") + e.what());
  }
  if (!out.allFinite()) throw Error(ErrorKind::FieldError, "field value is not finite");
  return out;
}

EquivariantField EquivariantField::constant_field(Vector value) {
  EquivariantField f;
  f.constant = std::move(value);
  return f;
}

EquivariantField smooth_field(const Geometry& geometry, std::uint64_t seed) {
  Rng rng(seed);
  if (const auto* m = geometry.mutation()) {
    const int k = static_cast<int>(m->layout().base_entries.size());
    const int n = m->bundle_algebra().dim();
    const Vector z0 = rng.uniform_vector(n, -1, 1);
    const Matrix z1 = Matrix::NullaryExpr(n, k, [&] { return rng.uniform(-0.5, 0.5); });
    const Matrix z2 = Matrix::NullaryExpr(n, k, [&] { return rng.uniform(-0.5, 0.5); });
    auto geo = std::make_shared<const Geometry>(geometry);
    EquivariantField f;
    f.eval = [geo, z0, z1, z2](const BundlePoint& p) {
      const MutationGeometry& mg = *geo->mutation();
      const Vector b = mg.base_coords(p.g);
      const AlgebraVector z = z0 + z1 * b + 0.3 * (z2 * b).array().sin().matrix();
      return Vector(mg.model().m_part(mg.to_model(adjoint(p.g.inverse(), z, mg.bundle_algebra()))));
    };
    return f;
  }
  const GaugeGeometry& gauge = *geometry.gauge();
  const int d = gauge.chart_dim();
  const Vector f0 = rng.uniform_vector(d, -1, 1);
  const Matrix f1 = Matrix::NullaryExpr(d, d, [&] { return rng.uniform(-0.5, 0.5); });
  const Matrix f2 = Matrix::NullaryExpr(d, d, [&] { return rng.uniform(-0.5, 0.5); });
  const ModelPair model = gauge.model();
  EquivariantField f;
  f.eval = [model, f0, f1, f2](const BundlePoint& p) {
    const Vector v = f0 + f1 * p.x + 0.3 * (f2 * p.x).array().sin().matrix();
    return Vector(model.m_part(adjoint(p.g.inverse(), model.from_m(v), model.algebra())));
  };
  return f;
}

double equivariance_residual(const Geometry& geometry, const EquivariantField& field, int n_samples,
                             std::uint64_t seed) {
  const ModelPair& model = geometry.model();
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const BundlePoint p = random_point(geometry, rng);
    const HElement h = h_element(geometry, rng.uniform_vector(model.dim_h(), -1.5, 1.5));
    const Vector lhs = field(right_translate(geometry, p, h));
    const Vector rhs = model.m_part(adjoint(h.model.inverse(), model.from_m(field(p)), model.algebra()));
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

Vector field_derivative(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& xi,
                        const EquivariantField& field, double step) {
  geometry.model().algebra().check_dim(xi);
  if (field.constant) return Vector::Zero(field.constant->size());
  return central_difference([&](double s) { return field(frame_flow(geometry, point, xi, s)); }, step);
}

Vector covariant_derivative(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& xi,
                            const EquivariantField& field, double step) {
  const ModelPair& model = geometry.model();
  const Vector f = field(point);
  return field_derivative(geometry, point, xi, field, step) - m_bracket(model, f, model.project_h(xi));
}

double vertical_derivative_residual(const Geometry& geometry, const BundlePoint& point, const Vector& eta_h,
                              const EquivariantField& field, double step) {
  const ModelPair& model = geometry.model();
  const AlgebraVector eta = model.from_h(eta_h);
  const Vector derivative = field_derivative(geometry, point, eta, field, step);
  return (derivative - m_bracket(model, field(point), eta)).cwiseAbs().maxCoeff();
}

IdentityReport check_structure_identities(const Geometry& geometry, const BundlePoint& point, const BundleField& x_lift,
                                          const BundleField& y_lift, const BundleField& z_field, double step) {
  const MutationGeometry* mg = geometry.mutation();
  if (mg == nullptr) throw Error(ErrorKind::Unsupported, "structure identities are only checked on mutation models");
  const ModelPair& model = mg->model();
  const MatrixAlgebra& g = model.algebra();
  const Matrix& p = point.g;

  auto flow = [&](const Matrix& q, const AlgebraVector& xi, double s) {
    return Matrix(q * group_exp(s * mg->bundle_matrix(xi)));
  };
  using MField = std::function<Vector(const Matrix&)>;
  // D_a F(q) = d/ds F(q exp(s a(q))) - [F(q), a(q)_h]_m
  auto covariant = [&](const BundleField& lift, const MField& f, const Matrix& q) -> Vector {
    const AlgebraVector a = lift(q);
    const Vector deriv = central_difference([&](double s) { return f(flow(q, a, s)); }, step);
    return deriv - m_bracket(model, f(q), model.project_h(a));
  };
  const MField z_m = [&](const Matrix& q) { return Vector(model.m_part(z_field(q))); };
  auto ambient_vector = [&](const BundleField& lift, const Matrix& q) { return Matrix(q * mg->bundle_matrix(lift(q))); };

  const AlgebraVector a = x_lift(p), b = y_lift(p), c = z_field(p);
  IdentityReport report;

  // omega([X^, Y^]) from ambient derivatives of the vector fields.
  const Matrix xv = ambient_vector(x_lift, p), yv = ambient_vector(y_lift, p);
  const Matrix dy_x = central_difference([&](double s) { return ambient_vector(y_lift, p + s * xv); }, step);
  const Matrix dx_y = central_difference([&](double s) { return ambient_vector(x_lift, p + s * yv); }, step);
  report.commutator_fd = mg->to_model(mg->bundle_algebra().coords(p.inverse() * (dy_x - dx_y)));
  const AlgebraVector xb = central_difference([&](double s) { return y_lift(flow(p, a, s)); }, step);
  const AlgebraVector ya = central_difference([&](double s) { return x_lift(flow(p, b, s)); }, step);
  report.commutator_formula =
      xb - ya + mg->to_model(bracket(mg->bundle_algebra(), mg->to_bundle(a), mg->to_bundle(b)));
  const AlgebraVector& v = report.commutator_fd;

  const Vector am = model.m_part(a), bm = model.m_part(b), cm = model.m_part(c);
  const MField a_m = [&](const Matrix& q) { return Vector(model.m_part(x_lift(q))); };
  const MField b_m = [&](const Matrix& q) { return Vector(model.m_part(y_lift(q))); };

  // First identity.
  report.first.lhs = covariant(x_lift, b_m, p) - covariant(y_lift, a_m, p) - model.m_part(v);
  const CurvatureValue omega_xy = curvature(geometry, point, a, b);
  report.first.rhs = omega_xy.omega_m - model.m_part(bracket(g, model.from_m(am), model.from_m(bm)));
  report.first.residual = (report.first.lhs - report.first.rhs).cwiseAbs().maxCoeff();

  // Second identity.
  const MField grad_y = [&](const Matrix& q) { return covariant(y_lift, z_m, q); };
  const MField grad_x = [&](const Matrix& q) { return covariant(x_lift, z_m, q); };
  const BundleField v_lift = [&](const Matrix&) { return v; };
  report.second.lhs = covariant(x_lift, grad_y, p) - covariant(y_lift, grad_x, p) - covariant(v_lift, z_m, p);
  const CurvatureValue omega_yx = curvature(geometry, point, b, a);
  const Vector inner = omega_yx.omega_h - model.h_part(bracket(g, model.from_m(bm), model.from_m(am)));
  report.second.rhs = m_bracket(model, cm, model.from_h(inner));
  report.second.residual = (report.second.lhs - report.second.rhs).cwiseAbs().maxCoeff();
  return report;
}

IdentityReport check_structure_identities(const Geometry& geometry, const BundlePoint& point, const Vector& x,
                                          const Vector& y, const Vector& z, std::uint64_t seed) {
  if (geometry.mutation() == nullptr)
    throw Error(ErrorKind::Unsupported, "structure identities are only checked on mutation models");
  const ModelPair& model = geometry.model();
  const int n = geometry.model().dim();
  const int k = static_cast<int>(point.g.size());
  Rng rng(seed);
  const Vector origin = flatten(point.g);
  auto make_lift = [&](const Vector& value, bool m_only) -> BundleField {
    Matrix w = Matrix::NullaryExpr(n, k, [&] { return rng.uniform(-0.5, 0.5); });
    Matrix u = Matrix::NullaryExpr(n, k, [&] { return rng.uniform(-0.5, 0.5); });
    if (m_only)
      for (int i : model.h_indices()) {
        w.row(i).setZero();
        u.row(i).setZero();
      }
    const AlgebraVector at_point = model.from_m(value);
    return [=](const Matrix& q) -> AlgebraVector {
      const Vector dq = flatten(q) - origin;
      return at_point + w * dq + 0.2 * (u * dq).array().sin().matrix();
    };
  };
  return check_structure_identities(geometry, point, make_lift(x, false), make_lift(y, false), make_lift(z, true));
}

}  // namespace cartan
