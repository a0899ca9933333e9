#include <doctest.h>

#include <cmath>

#include "cartan/calculus.hpp"
#include "cartan/catalog.hpp"
#include "cartan/error.hpp"

using namespace cartan;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Geometry torsion_gauge() {
  // theta = (du, dv + v du), no rotation part.
  const ModelPair model = euclidean_type_pair(Vector::Ones(2), "i(2)");
  ChartDomain domain;
  domain.box = {{-2, 2}, {-2, 2}};
  domain.reference = Vector::Zero(2);
  auto connection = [model](const Vector& x) {
    Matrix a = Matrix::Zero(model.dim(), 2);
    a(model.m_indices()[0], 0) = 1.0;
    a(model.m_indices()[1], 0) = x[1];
    a(model.m_indices()[1], 1) = 1.0;
    return a;
  };
  return GaugeGeometry("torsion", model, GroupStructure::single(3, BlockKind::AffinePseudoOrthogonal, Vector::Ones(2)),
                       domain, connection);
}

}  // namespace

TEST_CASE("Klein models are flat") {
  Rng rng(1);
  for (const std::string name : {"euclidean:2", "euclidean:3", "hyperbolic-klein:2", "hyperbolic-klein:3", "affine:2",
                                 "sl2xh"}) {
    const Geometry geo = catalog(name);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const BundlePoint p = random_point(geo, rng);
      const AlgebraVector x = rng.uniform_vector(geo.model().dim(), -1, 1);
      const AlgebraVector y = rng.uniform_vector(geo.model().dim(), -1, 1);
      worst = std::max(worst, max_abs(curvature(geo, p, x, y).assemble(geo.model())));
    }
    INFO(name);
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("hyperbolic curvature is minus the o(2) generator") {
  const Geometry hyp = catalog("hyperbolic:2");
  const ModelPair& model = hyp.model();
  // Oracle: [K1, K2] in o(1,2) by matrix commutator; its spatial block is J.
  Matrix k1 = Matrix::Zero(3, 3), k2 = Matrix::Zero(3, 3);
  k1(0, 1) = k1(1, 0) = 1;
  k2(0, 2) = k2(2, 0) = 1;
  const Matrix j = k1 * k2 - k2 * k1;
  CHECK(j(1, 2) == 1.0);
  CHECK(j(2, 1) == -1.0);
  Matrix j_affine = Matrix::Zero(3, 3);
  j_affine.topLeftCorner(2, 2) = j.bottomRightCorner(2, 2);
  const AlgebraVector expected = -model.algebra().coords_checked(j_affine);

  Rng rng(2);
  for (int s = 0; s < 10; ++s) {
    const CurvatureValue c =
        curvature(hyp, random_point(hyp, rng), model.from_m(vec({1, 0})), model.from_m(vec({0, 1})));
    CHECK(max_abs(c.omega_m) <= 1e-9);
    CHECK(max_abs(c.omega_h - model.h_part(expected)) <= 1e-10);
  }
  const ProbeReport probe = constant_curvature_probe(hyp, 100, 3);
  CHECK(probe.constant);
  CHECK(probe.max_deviation <= 1e-9);
  CHECK(probe.max_magnitude > 0.5);
}

TEST_CASE("torsion examples") {
  Rng rng(4);
  const Geometry hyp = catalog("hyperbolic:3");
  const Geometry euc = catalog("euclidean:3");
  for (int s = 0; s < 10; ++s) {
    const AlgebraVector x = rng.uniform_vector(6, -1, 1), y = rng.uniform_vector(6, -1, 1);
    CHECK(max_abs(torsion(hyp, random_point(hyp, rng), x, y)) <= 1e-12);
    CHECK(max_abs(torsion(euc, random_point(euc, rng), x, y)) <= 1e-12);
  }

  // d theta^2 = dv ^ du, so Omega_m(d_u, d_v) = (0, -1); at (u, v) the frame
  // vectors are e1 -> d_u - v d_v and e2 -> d_v.
  const Geometry tor = torsion_gauge();
  const ModelPair& model = tor.model();
  const BundlePoint p = BundlePoint::chart(vec({0.4, -0.7}), Matrix::Identity(3, 3));
  const Vector t = torsion(tor, p, model.from_m(vec({1, 0})), model.from_m(vec({0, 1})));
  CHECK(max_abs(t - vec({0, -1})) <= 1e-8);

  // Equivariance: at (x, h) the value is Ad_{h^{-1}} of the chart value.
  const HElement h = h_element(tor, vec({0.8}));
  const BundlePoint ph = right_translate(tor, p, h);
  const Vector th = torsion(tor, ph, model.from_m(vec({1, 0})), model.from_m(vec({0, 1})));
  const Vector rotated = model.m_part(adjoint(h.model.inverse(), model.from_m(vec({0, -1})), model.algebra()));
  CHECK(max_abs(th - rotated) <= 1e-8);
}

TEST_CASE("metric gauges are torsion-free") {
  Rng rng(5);
  for (const std::string name : {"sphere:2", "clifton-pohl"}) {
    const Geometry geo = catalog(name);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      const BundlePoint p = random_point(geo, rng);
      const AlgebraVector x = rng.uniform_vector(geo.model().dim(), -1, 1);
      const AlgebraVector y = rng.uniform_vector(geo.model().dim(), -1, 1);
      worst = std::max(worst, max_abs(torsion(geo, p, x, y)));
    }
    INFO(name);
    CHECK(worst <= 1e-7);
  }
}

TEST_CASE("sphere curvature is constant") {
  const Geometry sphere = catalog("sphere:2");
  const ModelPair& model = sphere.model();
  const AlgebraVector e1 = model.from_m(vec({1, 0})), e2 = model.from_m(vec({0, 1}));
  const Matrix id = Matrix::Identity(3, 3);
  const CurvatureValue a = curvature(sphere, BundlePoint::chart(vec({0.7, 0.3}), id), e1, e2);
  const CurvatureValue b = curvature(sphere, BundlePoint::chart(vec({2.1, -2.0}), id), e1, e2);
  CHECK(max_abs(a.omega_h - b.omega_h) <= 1e-7);
  // F(d_theta, d_phi) = d(cos theta)/d theta = -sin theta, rescaled by the
  // frame e2 = d_phi / sin theta.
  CHECK(std::abs(a.omega_h[0] + 1.0) <= 1e-7);

  const ProbeReport probe = constant_curvature_probe(sphere, 20, 6);
  CHECK(probe.constant);

  ChartDomain domain = sphere.gauge()->domain();
  const Geometry bumpy(build_gauge_from_metric("bumpy", {{"1", "0"}, {"0", "(1+0.3*theta^2)*sin(theta)^2"}},
                                               {"theta", "phi"}, {2, 0}, domain));
  const CurvatureValue c = curvature(bumpy, BundlePoint::chart(vec({0.7, 0.3}), id), e1, e2);
  const CurvatureValue d = curvature(bumpy, BundlePoint::chart(vec({2.1, 0.3}), id), e1, e2);
  CHECK(max_abs(c.omega_h - d.omega_h) > 1e-3);
  CHECK_FALSE(constant_curvature_probe(bumpy, 20, 6).constant);
}

TEST_CASE("gauge curvature of a pulled-back mutation matches the closed form") {
  ChartDomain domain;
  domain.box = {{-3, 3}, {-3, 3}};
  domain.reference = Vector::Zero(2);
  Rng rng(7);
  for (const std::string name : {"hyperbolic:2", "hyperbolic-klein:2"}) {
    const Geometry mutation = catalog(name);
    const Geometry gauge(gauge_from_mutation(*mutation.mutation(), domain, name + "-gauge"));
    for (int s = 0; s < 10; ++s) {
      const BundlePoint p = random_point(gauge, rng);
      const AlgebraVector x = rng.uniform_vector(3, -1, 1), y = rng.uniform_vector(3, -1, 1);
      const AlgebraVector closed = curvature(mutation, base_point(mutation), x, y).assemble(mutation.model());
      const AlgebraVector fd = curvature(gauge, p, x, y).assemble(gauge.model());
      CHECK(max_abs(closed - fd) <= 1e-6);
    }
  }
}

TEST_CASE("smooth fields are equivariant") {
  for (const std::string name : {"euclidean:2", "hyperbolic:2", "hyperbolic:3", "affine:2", "sl2xh", "sphere:2"}) {
    const Geometry geo = catalog(name);
    INFO(name);
    CHECK(equivariance_residual(geo, smooth_field(geo, 9), 20, 10) <= 1e-7);
  }
}

TEST_CASE("covariant derivative of constant fields") {
  Rng rng(11);
  const Geometry euc = catalog("euclidean:2");
  const EquivariantField y0 = EquivariantField::constant_field(vec({0.3, -1.2}));
  const BundlePoint p = random_point(euc, rng);
  CHECK(max_abs(covariant_derivative(euc, p, euc.model().from_m(vec({1, 2})), y0)) == 0.0);

  const Geometry hyp = catalog("hyperbolic:2");
  const ModelPair& model = hyp.model();
  const AlgebraVector xi = model.assemble(vec({0.4, 0.1}), vec({0.7}));
  const Vector expected = model.m_part(bracket(model.algebra(), model.project_h(xi), model.from_m(*y0.constant)));
  CHECK(max_abs(covariant_derivative(hyp, random_point(hyp, rng), xi, y0) - expected) <= 1e-14);
}

TEST_CASE("covariant derivative does not depend on the lift") {
  Rng rng(12);
  for (const std::string name : {"hyperbolic:2", "euclidean:3", "affine:2", "sphere:2"}) {
    const Geometry geo = catalog(name);
    const ModelPair& model = geo.model();
    const EquivariantField f = smooth_field(geo, 13);
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      const BundlePoint p = random_point(geo, rng);
      const Vector xm = rng.uniform_vector(model.dim_m(), -1, 1);
      const AlgebraVector a = model.assemble(xm, rng.uniform_vector(model.dim_h(), -1, 1));
      const AlgebraVector b = model.assemble(xm, rng.uniform_vector(model.dim_h(), -1, 1));
      worst = std::max(worst, max_abs(covariant_derivative(geo, p, a, f) - covariant_derivative(geo, p, b, f)));
    }
    INFO(name);
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("covariant derivative is bilinear") {
  Rng rng(14);
  const Geometry hyp = catalog("hyperbolic:2");
  const EquivariantField f = smooth_field(hyp, 15), g = smooth_field(hyp, 16);
  EquivariantField sum;
  sum.eval = [&](const BundlePoint& p) { return Vector(f(p) + g(p)); };
  for (int s = 0; s < 10; ++s) {
    const BundlePoint p = random_point(hyp, rng);
    const AlgebraVector a = rng.uniform_vector(3, -1, 1), b = rng.uniform_vector(3, -1, 1);
    const double alpha = rng.uniform(-2, 2);
    CHECK(max_abs(covariant_derivative(hyp, p, a + b, f) - covariant_derivative(hyp, p, a, f) -
                  covariant_derivative(hyp, p, b, f)) <= 1e-8);
    CHECK(max_abs(covariant_derivative(hyp, p, alpha * a, f) - alpha * covariant_derivative(hyp, p, a, f)) <= 1e-8);
    CHECK(max_abs(covariant_derivative(hyp, p, a, sum) - covariant_derivative(hyp, p, a, f) -
                  covariant_derivative(hyp, p, a, g)) <= 1e-8);
  }
}

TEST_CASE("field failures surface as FieldError") {
  const Geometry hyp = catalog("hyperbolic:2");
  EquivariantField bad;
  bad.eval = [](const BundlePoint&) -> Vector { throw Error(ErrorKind::NumericalFailure, "boom"); };
  try {
    covariant_derivative(hyp, base_point(hyp), Vector::Unit(3, 0), bad);
    FAIL("expected FieldError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FieldError);
  }
}

TEST_CASE("vertical derivative relation along vertical directions") {
  Rng rng(17);
  for (const std::string name : {"hyperbolic:2", "euclidean:2", "sphere:2"}) {
    const Geometry geo = catalog(name);
    const EquivariantField f = smooth_field(geo, 18);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s)
      worst = std::max(worst, vertical_derivative_residual(geo, random_point(geo, rng),
                                                     rng.uniform_vector(geo.model().dim_h(), -1, 1), f));
    INFO(name);
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("structure identities on euclidean:2") {
  Rng rng(19);
  const Geometry euc = catalog("euclidean:2");
  for (int s = 0; s < 10; ++s) {
    const IdentityReport r = check_structure_identities(euc, random_point(euc, rng), rng.uniform_vector(2, -1, 1),
                                                        rng.uniform_vector(2, -1, 1), rng.uniform_vector(2, -1, 1),
                                                        100 + s);
    CHECK(r.first.residual <= 1e-6);
    CHECK(r.second.residual <= 1e-6);
    CHECK(max_abs(r.second.rhs) == 0.0);
    CHECK(max_abs(r.second.lhs) <= 1e-6);
    CHECK(max_abs(r.commutator_fd - r.commutator_formula) <= 1e-6);
  }
}

TEST_CASE("structure identities on hyperbolic:2") {
  Rng rng(20);
  const Geometry hyp = catalog("hyperbolic:2");
  const ModelPair& model = hyp.model();
  double smallest_rhs = 1e9;
  for (int s = 0; s < 10; ++s) {
    const Vector x = rng.uniform_vector(2, -1, 1), y = rng.uniform_vector(2, -1, 1);
    // [m, m] lies in h, so the first identity's right side is Omega_m = 0.
    CHECK(max_abs(model.m_part(bracket(model.algebra(), model.from_m(x), model.from_m(y)))) == 0.0);
    const IdentityReport r =
        check_structure_identities(hyp, random_point(hyp, rng), x, y, rng.uniform_vector(2, -1, 1), 200 + s);
    CHECK(max_abs(r.first.rhs) <= 1e-12);
    CHECK(r.first.residual <= 1e-6);
    CHECK(r.second.residual <= 1e-6);
    CHECK(max_abs(r.commutator_fd - r.commutator_formula) <= 1e-6);
    smallest_rhs = std::min(smallest_rhs, r.second.rhs.norm());
  }
  CHECK(smallest_rhs > 1e-3);
}

TEST_CASE("structure identities reject gauge models") {
  const Geometry sphere = catalog("sphere:2");
  CHECK_THROWS_AS(check_structure_identities(sphere, base_point(sphere), vec({1, 0}), vec({0, 1}), vec({1, 1})),
                  Error);
}
