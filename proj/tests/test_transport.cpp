#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cartan/calculus.hpp"
#include "cartan/catalog.hpp"
#include "cartan/error.hpp"
#include "cartan/rk4.hpp"
#include "cartan/transport.hpp"

using namespace cartan;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// [[cosh, sinh v^T / |v|], [sinh v / |v|, I + (cosh - 1) v v^T / v^T v]]
Matrix hyperbolic_exp(const Vector& v, double t) {
  const int n = static_cast<int>(v.size());
  const double r = v.norm();
  Matrix out(n + 1, n + 1);
  out(0, 0) = std::cosh(t * r);
  out.block(0, 1, 1, n) = std::sinh(t * r) / r * v.transpose();
  out.block(1, 0, n, 1) = std::sinh(t * r) / r * v;
  out.block(1, 1, n, n) = Matrix::Identity(n, n) + (std::cosh(t * r) - 1) / (r * r) * v * v.transpose();
  return out;
}

// Curve p exp(t xi) exp(t eta) with eta in h: omega = Ad_{exp(-t eta)} X + Y.
LiftedCurve rotating_lift(const MutationGeometry& m, const Matrix& p, const Vector& x_m, const Vector& y_h) {
  const ModelPair& model = m.model();
  const AlgebraVector x = model.from_m(x_m), y = model.from_h(y_h);
  const Matrix xi = m.bundle_matrix(x), eta = m.bundle_matrix(y);
  LiftedCurve c;
  c.point = [=](double t) { return BundlePoint::group(p * group_exp(t * xi) * group_exp(t * eta)); };
  c.velocity = [=](double t) {
    return AlgebraVector(adjoint(group_exp(-t * model.algebra().matrix(y)), x, model.algebra()) + y);
  };
  c.t_min = -10;
  c.t_max = 10;
  return c;
}

Geometry klein_disk_gauge() {
  ChartDomain domain;
  domain.box = {{-0.7, 0.7}, {-0.7, 0.7}};
  domain.reference = Vector::Zero(2);
  const std::string w = "(1-x^2-y^2)";
  return Geometry(build_gauge_from_metric(
      "klein-disk",
      {{"1/" + w + "+x^2/" + w + "^2", "x*y/" + w + "^2"}, {"x*y/" + w + "^2", "1/" + w + "+y^2/" + w + "^2"}},
      {"x", "y"}, {2, 0}, domain));
}

}  // namespace

TEST_CASE("hyperbolic geodesics follow the cosh/sinh closed form") {
  const Geometry hyp = catalog("hyperbolic:2");
  Rng rng(1);
  for (double vv : {1.0, 2.0, 4.0}) {
    const Vector v = rng.unit_vector(2) * std::sqrt(vv);
    const BundlePoint p = random_point(hyp, rng, 0.5);
    const Trace trace = geodesic({hyp, p, v, 0.0, 5.0, 0.5});
    CHECK(trace.status == TraceStatus::Completed);
    for (const TraceSample& s : trace.samples) {
      const Matrix expected = p.g * hyperbolic_exp(v, s.t);
      CHECK(max_abs(s.frame - expected) <= 1e-8 * std::max(1.0, max_abs(expected)));
      CHECK((s.base - expected.col(0)).norm() <= 1e-8 * std::max(1.0, max_abs(expected)));
    }
  }
  const Trace unit = geodesic({hyp, base_point(hyp), vec({1, 0}), 0.0, 1.0, 0.01});
  CHECK(unit.samples.back().t == 1.0);
  CHECK(std::abs(unit.samples.back().base[0] - std::cosh(1.0)) < 1e-12);
  CHECK(std::abs(unit.samples.back().base[1] - std::sinh(1.0)) < 1e-12);
}

TEST_CASE("zero direction gives a constant trace") {
  for (const std::string name : {"hyperbolic:2", "sphere:2"}) {
    const Geometry geo = catalog(name);
    const BundlePoint p = base_point(geo);
    const Trace trace = geodesic({geo, p, Vector::Zero(2), 0.0, 1.0, 0.1});
    CHECK(trace.samples.size() == 11);
    for (const TraceSample& s : trace.samples) CHECK((s.base - trace.samples.front().base).norm() == 0.0);
  }
}

TEST_CASE("geodesic rejects bad specs") {
  const Geometry hyp = catalog("hyperbolic:2");
  CHECK_THROWS_AS(geodesic({hyp, base_point(hyp), vec({1, 0, 0}), 0.0, 1.0, 0.1}), Error);
  CHECK_THROWS_AS(geodesic({hyp, base_point(hyp), vec({1, 0}), 0.0, 1.0, 2.0}), Error);
  CHECK_THROWS_AS(geodesic({hyp, base_point(hyp), vec({1, 0}), 1.0, 0.0, 0.1}), Error);
}

TEST_CASE("Clifton-Pohl null geodesic escapes before t = 1") {
  const Geometry cp = catalog("clifton-pohl");
  const BundlePoint p = base_point(cp);
  const Vector x = chart_velocity_to_m(cp, p, vec({1, 0}));
  const Trace trace = geodesic({cp, p, x, 0.0, 2.0, 1e-4});
  CHECK(trace.status == TraceStatus::BlowUp);
  CHECK(trace.t_stop >= 0.9);
  CHECK(trace.t_stop <= 1.0);
  // Samples follow (1/(1-t), 0) while the solution is resolved.
  for (const TraceSample& s : trace.samples) {
    if (s.t > 0.9) break;
    CHECK(std::abs(s.base[0] - 1.0 / (1.0 - s.t)) <= 1e-6 * s.base[0]);
    CHECK(std::abs(s.base[1]) <= 1e-9);
    CHECK(cp.model_group().residual(s.frame) <= 1e-7);
  }
}

TEST_CASE("the analytic Clifton-Pohl curve solves both geodesic equations") {
  const Geometry cp = catalog("clifton-pohl");
  const GaugeGeometry& gauge = *cp.gauge();
  const MatrixAlgebra& g = gauge.model().algebra();
  auto x = [](double t) { return vec({1.0 / (1.0 - t), 0.0}); };
  auto xd = [](double t) { return vec({1.0 / ((1.0 - t) * (1.0 - t)), 0.0}); };
  auto xdd = [](double t) { return vec({2.0 / std::pow(1.0 - t, 3), 0.0}); };
  double frame_residual = 0.0, christoffel_residual = 0.0;
  for (double t = 0.0; t <= 0.9 + 1e-12; t += 0.05) {
    // d/dt (E xdot) + omega(xdot) E xdot = 0 in the coframe.
    auto ex = [&](double s) { return Vector(gauge.coframe(x(t + s)) * xd(t + s)); };
    const Vector d = central_difference(ex, 1e-5 * (1.0 - t));
    const Matrix omega = g.matrix(gauge.connection(x(t)) * xd(t)).topLeftCorner(2, 2);
    const Vector r1 = d + omega * gauge.coframe(x(t)) * xd(t);
    frame_residual = std::max(frame_residual, r1.norm() / std::pow(1.0 - t, -3));
    // xddot^k + Gamma^k_ij xdot^i xdot^j = 0 with Gamma from metric differences.
    std::vector<Matrix> dg(2);
    for (int k = 0; k < 2; ++k)
      dg[k] = central_difference([&](double s) { return gauge.metric()->metric(x(t) + s * Vector::Unit(2, k)); }, 1e-5);
    const Matrix ginv = gauge.metric()->metric(x(t)).inverse();
    Vector r2 = xdd(t);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int l = 0; l < 2; ++l)
            r2[k] += 0.5 * ginv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j)) * xd(t)[i] * xd(t)[j];
    christoffel_residual = std::max(christoffel_residual, r2.norm() / std::pow(1.0 - t, -3));
  }
  CHECK(frame_residual <= 1e-6);
  CHECK(christoffel_residual <= 1e-6);
}

TEST_CASE("gauge route of hyperbolic-klein matches the closed form") {
  const Geometry klein = catalog("hyperbolic-klein:2");
  ChartDomain domain;
  domain.box = {{-4, 4}, {-4, 4}};
  domain.reference = Vector::Zero(2);
  const Geometry gauge(gauge_from_mutation(*klein.mutation(), domain, "hk-gauge"));
  const auto& section = gauge.gauge()->section();
  const Vector x0 = vec({0.3, -0.2});
  const BundlePoint start = BundlePoint::chart(x0, Matrix::Identity(3, 3));
  const Vector v = vec({0.6, 0.8});
  const Trace trace = geodesic({gauge, start, v, 0.0, 2.0, 1e-3});
  CHECK(trace.status == TraceStatus::Completed);
  double worst = 0.0;
  for (const TraceSample& s : trace.samples)
    worst = std::max(worst, max_abs(section(s.base) * s.frame - section(x0) * hyperbolic_exp(v, s.t)));
  CHECK(worst <= 1e-6);
}

TEST_CASE("punctured euclidean chart: straight lines leave the chart") {
  ChartDomain domain;
  domain.box = {{-2, 2}, {-2, 2}};
  domain.excluded.push_back({Vector::Zero(2), 0.5});
  domain.reference = vec({1, 1});
  const Geometry flat(build_gauge_from_metric("punctured", {{"1", "0"}, {"0", "1"}}, {"x", "y"}, {2, 0}, domain));
  const BundlePoint p = base_point(flat);
  const Trace out = geodesic({flat, p, vec({1, 0}), 0.0, 5.0, 0.01});
  CHECK(out.status == TraceStatus::LeftChart);
  CHECK(std::abs(out.t_stop - 1.0) <= 1e-9);
  const Trace hole = geodesic({flat, p, vec({-1, -1}) / std::sqrt(2.0), 0.0, 5.0, 0.01});
  CHECK(hole.status == TraceStatus::LeftChart);
  CHECK(std::abs(hole.t_stop - (std::sqrt(2.0) - 0.5)) <= 1e-9);
}

TEST_CASE("euclidean transport along a horizontal curve is the identity") {
  const Geometry euc = catalog("euclidean:2");
  const ModelPair& model = euc.model();
  const LiftedCurve c = exp_path(
      *euc.mutation(), Matrix::Identity(3, 3), [&](double t) { return model.from_m(vec({std::sin(t), t * t})); },
      [&](double t) { return model.from_m(vec({std::cos(t), 2 * t})); }, 0, 3);
  const Vector v = vec({0.3, -0.7});
  CHECK((parallel_transport(euc, c, v, 0, 3, 0.01) - v).norm() <= 1e-14);
}

TEST_CASE("geodesic velocity is parallel along rotating lifts") {
  Rng rng(2);
  const Geometry hyp = catalog("hyperbolic:2");
  const MutationGeometry& m = *hyp.mutation();
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Vector x = rng.uniform_vector(2, -1, 1);
    const LiftedCurve c = rotating_lift(m, random_point(hyp, rng).g, x, rng.uniform_vector(1, -2, 2));
    const double t1 = rng.uniform(0.5, 2.0);
    const Vector moved = parallel_transport(hyp, c, x, 0, t1, 1e-3);
    worst = std::max(worst, (moved - hyp.model().m_part(c.velocity(t1))).norm());
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("transport is linear and reversible") {
  Rng rng(3);
  const Geometry hyp = catalog("hyperbolic:2");
  const LiftedCurve c = rotating_lift(*hyp.mutation(), base_point(hyp).g, vec({0.5, 0.2}), vec({1.3}));
  const Vector v = rng.uniform_vector(2, -1, 1), w = rng.uniform_vector(2, -1, 1);
  const double alpha = -0.7;
  const Vector lhs = parallel_transport(hyp, c, alpha * v + w, 0, 1.5, 1e-3);
  const Vector rhs = alpha * parallel_transport(hyp, c, v, 0, 1.5, 1e-3) + parallel_transport(hyp, c, w, 0, 1.5, 1e-3);
  CHECK((lhs - rhs).norm() <= 1e-9);
  const Vector back = parallel_transport(hyp, c, parallel_transport(hyp, c, v, 0, 1.5, 1e-3), 1.5, 0, 1e-3);
  CHECK((back - v).norm() <= 1e-7);
  CHECK_THROWS_AS(parallel_transport(hyp, c, v, 0, 20, 1e-3), Error);
}

TEST_CASE("holonomy around a hyperbolic triangle is rotation by the area") {
  const Geometry disk = klein_disk_gauge();
  const GaugeGeometry& gauge = *disk.gauge();
  const std::vector<Vector> corners = {vec({-0.3, -0.2}), vec({0.5, -0.1}), vec({0.1, 0.6})};
  // Interior angles from the metric at each vertex; straight chords are
  // geodesics in this chart.
  double angle_sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Vector& p = corners[k];
    const Vector a = corners[(k + 1) % 3] - p, b = corners[(k + 2) % 3] - p;
    const Matrix g = gauge.metric()->metric(p);
    angle_sum += std::acos(a.dot(g * b) / std::sqrt(a.dot(g * a) * b.dot(g * b)));
  }
  const double area = std::numbers::pi - angle_sum;
  CHECK(area > 0.1);

  Vector v = vec({1, 0});
  for (int k = 0; k < 3; ++k) {
    const Vector a = corners[k], b = corners[(k + 1) % 3];
    const LiftedCurve edge = chart_lift(
        gauge, [=](double t) { return Vector(a + t * (b - a)); }, [=](double) { return Vector(b - a); }, 0, 1);
    v = parallel_transport(disk, edge, v, 0, 1, 1e-4);
  }
  const double angle = std::atan2(v[1], v[0]);
  CHECK(std::abs(v.norm() - 1.0) <= 1e-9);
  // Counterclockwise loop in curvature -1 turns vectors clockwise.
  CHECK(std::abs(angle + area) <= 1e-4);
}

TEST_CASE("horizontal geodesic lifts develop to exp(tX)") {
  Rng rng(4);
  for (const std::string name : {"hyperbolic:2", "hyperbolic:3", "euclidean:2"}) {
    const Geometry geo = catalog(name);
    const MutationGeometry& m = *geo.mutation();
    const Vector x = rng.uniform_vector(geo.model().dim_m(), -1, 1);
    const Trace dev = develop(geo, geodesic_lift(m, random_point(geo, rng).g, x), 0, 2, 1e-2);
    const Matrix gen = geo.model().algebra().matrix(geo.model().from_m(x));
    double worst = 0.0;
    for (const TraceSample& s : dev.samples) worst = std::max(worst, max_abs(s.frame - group_exp(s.t * gen)));
    INFO(name);
    CHECK(worst <= 1e-7);
  }
}

TEST_CASE("Klein developments are left translates") {
  Rng rng(5);
  for (const std::string name : {"affine:2", "sl2xh", "hyperbolic-klein:2"}) {
    const Geometry geo = catalog(name);
    const MutationGeometry& m = *geo.mutation();
    const int n = geo.model().dim();
    const Vector a = rng.uniform_vector(n, -0.5, 0.5), b = rng.uniform_vector(n, -0.5, 0.5);
    const Matrix p0 = random_point(geo, rng).g;
    const LiftedCurve c = exp_path(
        m, p0, [=](double t) { return AlgebraVector(std::sin(t) * a + t * t * b); },
        [=](double t) { return AlgebraVector(std::cos(t) * a + 2 * t * b); }, 0, 2);
    const Trace dev = develop(geo, c, 0, 2, 1e-2);
    const Matrix start_inv = c.point(0).g.inverse();
    double worst = 0.0;
    for (const TraceSample& s : dev.samples) worst = std::max(worst, max_abs(s.frame - start_inv * c.point(s.t).g));
    INFO(name);
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("a closed hyperbolic rhombus develops to an open path") {
  const Geometry hyp = catalog("hyperbolic:2");
  const MutationGeometry& m = *hyp.mutation();
  const ModelPair& model = hyp.model();
  // Rhombus with vertices at distance r from a center, cosh r = sqrt(cosh 1),
  // so each side has length 1. Interior angle 2 beta from the law of cosines.
  const double side = 1.0;
  const double r = std::acosh(std::sqrt(std::cosh(side)));
  const double beta = std::acos((std::cosh(r) * std::cosh(side) - std::cosh(r)) / (std::sinh(r) * std::sinh(side)));
  const double turn = std::numbers::pi - 2 * beta;
  const AlgebraVector walk = model.from_m(vec({side, 0}));
  const AlgebraVector rotate = model.from_h(vec({turn}));
  // Alternate walks (even k) and in-place turns (odd k) on [k, k+1], each
  // with the smooth speed profile 1 - cos(2 pi tau) so the velocity is
  // continuous at the corners.
  auto progress = [](double tau) { return tau - std::sin(2 * std::numbers::pi * tau) / (2 * std::numbers::pi); };
  auto segment_point = [&](double t) {
    Matrix p = Matrix::Identity(3, 3);
    for (int k = 0; k < 8 && t > 0; ++k) {
      const double tau = std::min(1.0, t);
      p *= group_exp(progress(tau) * m.bundle_matrix(k % 2 == 0 ? walk : rotate));
      t -= tau;
    }
    return p;
  };
  LiftedCurve loop;
  loop.point = [&](double t) { return BundlePoint::group(segment_point(t)); };
  loop.velocity = [&](double t) {
    const int k = std::clamp(static_cast<int>(std::floor(t)), 0, 7);
    const double speed = 1 - std::cos(2 * std::numbers::pi * (t - k));
    return AlgebraVector(speed * (k % 2 == 0 ? walk : rotate));
  };
  loop.t_min = 0;
  loop.t_max = 8;
  CHECK((m.base_coords(loop.point(8).g) - vec({1, 0, 0})).norm() <= 1e-12);

  const Trace dev = develop(hyp, loop, 0, 8, 1e-3);
  const Matrix& end = dev.samples.back().frame;
  Matrix exact = Matrix::Identity(3, 3);
  for (int k = 0; k < 8; ++k) exact *= group_exp(model.algebra().matrix(k % 2 == 0 ? walk : rotate));
  CHECK(max_abs(end - exact) <= 1e-9);
  CHECK(dev.samples.back().base.norm() > 0.01);
}

TEST_CASE("lift characterizations of geodesics") {
  Rng rng(6);
  const Geometry hyp = catalog("hyperbolic:2");
  const MutationGeometry& m = *hyp.mutation();
  const ModelPair& model = hyp.model();
  for (int s = 0; s < 5; ++s) {
    const Vector x = rng.uniform_vector(2, -1, 1);
    const Vector y = rng.uniform_vector(1, -1, 1);
    const Matrix p = random_point(hyp, rng).g;
    const Matrix xi = m.bundle_matrix(model.from_m(x)), eta = m.bundle_matrix(model.from_h(y));
    auto omega_of = [&](const std::function<Matrix(double)>& curve, double t) {
      const Matrix dc = central_difference([&](double h) { return curve(t + h); }, 1e-3);
      return AlgebraVector(m.to_model(m.bundle_algebra().coords(curve(t).inverse() * dc)));
    };
    const std::function<Matrix(double)> horizontal = [&](double t) { return Matrix(p * group_exp(t * xi)); };
    const std::function<Matrix(double)> twisted = [&](double t) {
      return Matrix(p * group_exp(t * xi) * group_exp(t * eta));
    };
    for (double t : {0.3, 1.1}) {
      const Vector dw =
          central_difference([&](double h) { return Vector(model.m_part(omega_of(horizontal, t + h))); }, 1e-3);
      CHECK(dw.norm() <= 1e-7);
      const AlgebraVector a = omega_of(twisted, t);
      const Vector da = central_difference([&](double h) { return Vector(model.m_part(omega_of(twisted, t + h))); }, 1e-3);
      const Vector expected = model.m_part(bracket(model.algebra(), model.project_m(a), model.project_h(a)));
      CHECK((da - expected).norm() <= 1e-6);
    }
  }
}

TEST_CASE("RK4 transport and development are fourth order") {
  const Geometry hyp = catalog("hyperbolic:2");
  const MutationGeometry& m = *hyp.mutation();
  const LiftedCurve c = exp_path(
      m, Matrix::Identity(3, 3), [](double t) { return AlgebraVector(vec({0.5 * std::sin(t), 0.3 * t * t, 0.8 * t})); },
      [](double t) { return AlgebraVector(vec({0.5 * std::cos(t), 0.6 * t, 0.8})); }, 0, 2);
  const Vector v = vec({1, 0.5});
  const Vector reference = parallel_transport(hyp, c, v, 0, 2, 0.2 / 64);
  const double e1 = (parallel_transport(hyp, c, v, 0, 2, 0.2) - reference).norm();
  const double e2 = (parallel_transport(hyp, c, v, 0, 2, 0.1) - reference).norm();
  CHECK(e1 / e2 >= 12.0);

  const Matrix fine = develop(hyp, c, 0, 2, 0.2 / 64).samples.back().frame;
  const double d1 = max_abs(develop(hyp, c, 0, 2, 0.2).samples.back().frame - fine);
  const double d2 = max_abs(develop(hyp, c, 0, 2, 0.1).samples.back().frame - fine);
  CHECK(d1 / d2 >= 12.0);
}

TEST_CASE("Jacobi fields") {
  const Geometry euc = catalog("euclidean:2");
  const JacobiTrace flat = jacobi_field({euc, base_point(euc), vec({1, 0}), 0, 2, 0.01}, {vec({0, 0}), vec({0, 1})}, 0.01);
  for (const JacobiSample& s : flat.samples) CHECK((s.state.j - vec({0, s.t})).norm() <= 1e-12);
  CHECK(flat.max_discrepancy <= 1e-8);

  const Geometry hyp = catalog("hyperbolic:2");
  const JacobiTrace curved =
      jacobi_field({hyp, base_point(hyp), vec({1, 0}), 0, 2, 0.01}, {vec({0, 0}), vec({0, 1})}, 1e-3);
  double worst = 0.0;
  for (const JacobiSample& s : curved.samples) worst = std::max(worst, std::abs(s.state.j.norm() - std::sinh(s.t)));
  CHECK(worst <= 1e-5);
  CHECK(curved.max_discrepancy <= 1e-4);

  Rng rng(7);
  for (int k = 0; k < 10; ++k) {
    const JacobiTrace t = jacobi_field({hyp, random_point(hyp, rng), rng.uniform_vector(2, -1, 1), 0, 2, 0.01},
                                       {rng.uniform_vector(2, -1, 1), rng.uniform_vector(2, -1, 1)}, 1e-2);
    CHECK(t.max_discrepancy <= 1e-4);
  }
  const Geometry sphere = catalog("sphere:2");
  CHECK_THROWS_AS(jacobi_field({sphere, base_point(sphere), vec({1, 0}), 0, 1, 0.1}, {vec({0, 0}), vec({0, 1})}, 0.1),
                  Error);
}

TEST_CASE("trace CSV round trip") {
  const Geometry hyp = catalog("hyperbolic:2");
  Trace trace = geodesic({hyp, base_point(hyp), vec({0.3, 0.9}), 0, 1, 0.1});
  trace.status = TraceStatus::BlowUp;
  trace.t_stop = 0.123456789012345678;
  std::stringstream ss;
  write_trace_csv(ss, trace);
  const std::string text = ss.str();
  CHECK(text.rfind("t,x1,x2,x3,frame00,", 0) == 0);
  const Trace back = read_trace_csv(ss);
  CHECK(back.status == TraceStatus::BlowUp);
  CHECK(back.t_stop == trace.t_stop);
  REQUIRE(back.samples.size() == trace.samples.size());
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    CHECK(back.samples[i].t == trace.samples[i].t);
    CHECK(back.samples[i].base == trace.samples[i].base);
    CHECK(back.samples[i].frame == trace.samples[i].frame);
    CHECK(back.samples[i].velocity_m == trace.samples[i].velocity_m);
  }
  std::stringstream bad("t,x1\n0.5,abc\n");
  CHECK_THROWS_AS(read_trace_csv(bad), Error);
}
