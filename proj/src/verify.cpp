#include "cartan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>

#include "cartan/catalog.hpp"
#include "cartan/error.hpp"
#include "cartan/rk4.hpp"

namespace cartan {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

class Suite {
 public:
  Suite(std::string name, std::string title) { result_.name = std::move(name), result_.title = std::move(title); }

  void at_most(const std::string& label, double value, double bound) { add(label, value, bound, true); }
  void at_least(const std::string& label, double value, double bound) { add(label, value, bound, false); }
  void holds(const std::string& label, bool ok) { add(label, ok ? 1.0 : 0.0, 1.0, false); }

  SuiteResult finish() {
    result_.pass = !result_.checks.empty();
    for (const CheckLine& c : result_.checks) result_.pass = result_.pass && c.pass;
    return std::move(result_);
  }

 private:
  void add(const std::string& label, double value, double bound, bool at_most) {
    const bool pass = std::isfinite(value) && (at_most ? value <= bound : value >= bound);
    result_.checks.push_back({label, value, bound, at_most, pass});
  }

  SuiteResult result_;
};

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

SuiteResult closed_form(std::uint64_t seed) {
  Suite s("closed-form", "hyperbolic geodesics match the cosh/sinh closed form");
  const Geometry hyp = catalog("hyperbolic:2");
  Rng rng(seed);
  double worst = 0.0;
  for (double vv : {1.0, 2.0, 4.0}) {
    const Vector v = rng.unit_vector(2) * std::sqrt(vv);
    const Trace trace = geodesic({hyp, base_point(hyp), v, 0.0, 5.0, 0.5});
    for (const TraceSample& sample : trace.samples)
      for (double t : {0.5, 1.0, 2.0, 5.0})
        if (std::abs(sample.t - t) < 1e-12) {
          const Matrix expected = hyperbolic_exp(v, t);
          worst = std::max(worst, max_abs(sample.frame - expected) / std::max(1.0, max_abs(expected)));
        }
  }
  s.at_most("mutation path, relative entrywise error", worst, 1e-8);

  const Geometry klein = catalog("hyperbolic-klein:2");
  ChartDomain domain;
  domain.box = {{-4, 4}, {-4, 4}};
  domain.reference = Vector::Zero(2);
  const Geometry gauge(gauge_from_mutation(*klein.mutation(), domain, "hyperbolic-klein-chart"));
  const auto& section = gauge.gauge()->section();
  const Vector x0 = vec2(0.3, -0.2);
  const Vector v = rng.unit_vector(2);
  const Trace trace = geodesic({gauge, BundlePoint::chart(x0, Matrix::Identity(3, 3)), v, 0.0, 2.0, 1e-3});
  double gauge_worst = trace.status == TraceStatus::Completed ? 0.0 : INFINITY;
  for (const TraceSample& sample : trace.samples)
    gauge_worst =
        std::max(gauge_worst, max_abs(section(sample.base) * sample.frame - section(x0) * hyperbolic_exp(v, sample.t)));
  s.at_most("gauge route at step 1e-3", gauge_worst, 1e-6);
  return s.finish();
}

SuiteResult curvature_suite(std::uint64_t seed) {
  Suite s("curvature", "hyperbolic curvature is constant and minus the o(2) generator");
  const Geometry hyp = catalog("hyperbolic:2");
  const ModelPair& model = hyp.model();
  Matrix k1 = Matrix::Zero(3, 3), k2 = Matrix::Zero(3, 3);
  k1(0, 1) = k1(1, 0) = 1;
  k2(0, 2) = k2(2, 0) = 1;
  const Matrix j = k1 * k2 - k2 * k1;
  Matrix j_affine = Matrix::Zero(3, 3);
  j_affine.topLeftCorner(2, 2) = j.bottomRightCorner(2, 2);
  const Vector expected = model.h_part(-model.algebra().coords_checked(j_affine));
  Rng rng(seed);
  double torsion_worst = 0.0, h_worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const CurvatureValue c =
        curvature(hyp, random_point(hyp, rng), model.from_m(vec2(1, 0)), model.from_m(vec2(0, 1)));
    torsion_worst = std::max(torsion_worst, max_abs(c.omega_m));
    h_worst = std::max(h_worst, max_abs(c.omega_h - expected));
  }
  s.at_most("|Omega_m|", torsion_worst, 1e-9);
  s.at_most("|Omega_h(e1,e2) + J|", h_worst, 1e-10);
  const ProbeReport probe = constant_curvature_probe(hyp, 100, seed);
  s.at_most("probe deviation over 100 points", probe.max_deviation, 1e-9);
  return s.finish();
}

SuiteResult klein_flatness(std::uint64_t seed) {
  Suite s("klein-flatness", "Klein models are flat");
  Rng rng(seed);
  for (const std::string name :
       {"euclidean:2", "euclidean:3", "hyperbolic-klein:2", "hyperbolic-klein:3", "affine:2", "sl2xh"}) {
    const Geometry geo = catalog(name);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const BundlePoint p = random_point(geo, rng);
      const AlgebraVector x = rng.uniform_vector(geo.model().dim(), -1, 1);
      const AlgebraVector y = rng.uniform_vector(geo.model().dim(), -1, 1);
      worst = std::max(worst, max_abs(curvature(geo, p, x, y).assemble(geo.model())));
    }
    s.at_most(name + " |Omega|", worst, 1e-10);
  }
  return s.finish();
}

SuiteResult identities(std::uint64_t seed) {
  Suite s("identities", "structure identities and the vertical derivative relation");
  Rng rng(seed);
  for (const std::string name : {"euclidean:2", "hyperbolic:2"}) {
    const Geometry geo = catalog(name);
    double first = 0.0, second = 0.0;
    for (int k = 0; k < 50; ++k) {
      const IdentityReport r = check_structure_identities(geo, random_point(geo, rng), rng.uniform_vector(2, -1, 1),
                                                          rng.uniform_vector(2, -1, 1), rng.uniform_vector(2, -1, 1),
                                                          seed * 1000 + k);
      first = std::max(first, r.first.residual);
      second = std::max(second, r.second.residual);
    }
    s.at_most(name + " first identity", first, 1e-6);
    s.at_most(name + " second identity", second, 1e-6);
  }
  for (const std::string name : {"euclidean:2", "hyperbolic:2"}) {
    const Geometry geo = catalog(name);
    const EquivariantField f = smooth_field(geo, seed + 1);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k)
      worst = std::max(worst, vertical_derivative_residual(geo, random_point(geo, rng),
                                                     rng.uniform_vector(geo.model().dim_h(), -1, 1), f));
    s.at_most(name + " vertical relation", worst, 1e-6);
  }
  return s.finish();
}

SuiteResult parallel_velocity(std::uint64_t seed) {
  Suite s("parallel-velocity", "geodesic velocity is parallel");
  Rng rng(seed);
  const Geometry hyp = catalog("hyperbolic:2");
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vector x = rng.uniform_vector(2, -1, 1);
    const LiftedCurve c = twisted_geodesic_lift(*hyp.mutation(), random_point(hyp, rng).g, x, rng.uniform_vector(1, -2, 2));
    const double t1 = rng.uniform(0.5, 2.0);
    worst = std::max(worst, (parallel_transport(hyp, c, x, 0, t1, 1e-3) - hyp.model().m_part(c.velocity(t1))).norm());
  }
  s.at_most("transported vs terminal velocity, 20 geodesics", worst, 1e-7);
  return s.finish();
}

SuiteResult development(std::uint64_t seed) {
  Suite s("development", "horizontal geodesic lifts develop to exp(tX)");
  Rng rng(seed);
  for (const std::string name : {"hyperbolic:2", "hyperbolic:3", "euclidean:2"}) {
    const Geometry geo = catalog(name);
    const Vector x = rng.uniform_vector(geo.model().dim_m(), -1, 1);
    const Trace dev = develop(geo, geodesic_lift(*geo.mutation(), random_point(geo, rng).g, x), 0, 2, 1e-2);
    const Matrix gen = geo.model().algebra().matrix(geo.model().from_m(x));
    double worst = 0.0;
    for (const TraceSample& sample : dev.samples) worst = std::max(worst, max_abs(sample.frame - group_exp(sample.t * gen)));
    s.at_most(name + " on [0,2]", worst, 1e-7);
  }
  return s.finish();
}

SuiteResult hopf_rinow(std::uint64_t seed) {
  Suite s("hopf-rinow", "mutation models are complete; Trotter products converge at first order");
  for (const std::string& name : mutation_catalog_names()) {
    const CompletenessReport r = completeness_report(catalog(name), 50.0, 8, seed);
    s.holds(name + " complete to horizon 50", r.verdict == CompletenessVerdict::CompleteUpToHorizon &&
                                                  r.vertical_complete);
  }
  const Geometry sl2 = catalog("sl2xh");
  const std::vector<double> errs =
      trotter_probe(sl2.model().algebra(), Vector::Unit(4, 1), Vector::Unit(4, 2), 1.0, {64, 128, 256, 512});
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    const double ratio = errs[k] / errs[k + 1];
    const std::string n = std::to_string(64 << k);
    s.at_least("trotter ratio n=" + n, ratio, 1.8);
    s.at_most("trotter ratio n=" + n, ratio, 2.2);
  }
  return s.finish();
}

Matrix sl2_block(const Matrix& a, double angle) {
  Matrix out = Matrix::Zero(4, 4);
  out.topLeftCorner(2, 2) = a;
  out(2, 2) = out(3, 3) = std::cos(angle);
  out(3, 2) = std::sin(angle);
  out(2, 3) = -std::sin(angle);
  return out;
}

SuiteResult sl2_counterexample(std::uint64_t seed) {
  Suite s("sl2-counterexample", "exp is not onto SL2(R)");
  const Geometry sl2 = catalog("sl2xh");
  const MatrixAlgebra& g = sl2.model().algebra();
  Matrix a(2, 2);
  a << -1, 1, 0, -1;
  bool refused = false;
  try {
    connect_by_geodesic(sl2, Matrix::Identity(4, 4), sl2_block(a, 0.0), seed);
  } catch (const Error& e) {
    refused = e.kind() == ErrorKind::NoGeodesicFound;
  }
  s.holds("[[-1,1],[0,-1]] gives NoGeodesicFound", refused);
  s.holds("analytic witness: trace -2 and not -I", !sl2_in_exp_image(a));
  Rng rng(seed);
  int found = 0, tried = 0;
  double worst = 0.0;
  while (tried < 20) {
    const Vector c = rng.uniform_vector(3, -1.5, 1.5);
    if (c[0] * c[0] + c[1] * c[2] <= 0.05) continue;
    ++tried;
    const Matrix target = group_exp(g.matrix(sl2.model().from_m(c))).topLeftCorner(2, 2);
    const Matrix p = sl2_block(Matrix::Identity(2, 2), rng.uniform(-3, 3));
    const Matrix q = sl2_block(target, rng.uniform(-3, 3));
    const ConnectResult r = search_geodesic(sl2, p, q, seed);
    if (!r.found) continue;
    ++found;
    worst = std::max(worst, max_abs(p * group_exp(g.matrix(sl2.model().from_m(r.x_m))) - q * r.h));
  }
  s.at_least("random targets with trace > 2 connected", found, 20);
  s.at_most("|p exp(X) - q h|", worst, 1e-8);
  return s.finish();
}

SuiteResult clifton_pohl(std::uint64_t) {
  Suite s("clifton-pohl", "the Clifton-Pohl null geodesic escapes in finite time");
  const Geometry cp = catalog("clifton-pohl");
  const GaugeGeometry& gauge = *cp.gauge();
  const BundlePoint p = base_point(cp);
  const Trace trace = geodesic({cp, p, chart_velocity_to_m(cp, p, vec2(1, 0)), 0.0, 2.0, 1e-4});
  s.holds("status BlowUp", trace.status == TraceStatus::BlowUp);
  s.at_least("t_escape", trace.t_stop, 0.9);
  s.at_most("t_escape", trace.t_stop, 1.0);

  const MatrixAlgebra& g = gauge.model().algebra();
  auto x = [](double t) { return vec2(1.0 / (1.0 - t), 0.0); };
  auto xd = [](double t) { return vec2(1.0 / ((1.0 - t) * (1.0 - t)), 0.0); };
  auto xdd = [](double t) { return vec2(2.0 / std::pow(1.0 - t, 3), 0.0); };
  double frame_residual = 0.0, christoffel_residual = 0.0;
  for (int k = 0; k <= 18; ++k) {
    const double t = 0.05 * k;
    auto ex = [&](double h) { return Vector(gauge.coframe(x(t + h)) * xd(t + h)); };
    const Vector d = central_difference(ex, 1e-5 * (1.0 - t));
    const Matrix omega = g.matrix(gauge.connection(x(t)) * xd(t)).topLeftCorner(2, 2);
    const Vector r1 = d + omega * gauge.coframe(x(t)) * xd(t);
    frame_residual = std::max(frame_residual, r1.norm() * std::pow(1.0 - t, 3));
    std::vector<Matrix> dg(2);
    for (int i = 0; i < 2; ++i)
      dg[i] = central_difference([&](double h) { return gauge.metric()->metric(x(t) + h * Vector::Unit(2, i)); }, 1e-5);
    const Matrix ginv = gauge.metric()->metric(x(t)).inverse();
    Vector r2 = xdd(t);
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int l = 0; l < 2; ++l)
            r2[c] += 0.5 * ginv(c, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j)) * xd(t)[i] * xd(t)[j];
    christoffel_residual = std::max(christoffel_residual, r2.norm() * std::pow(1.0 - t, 3));
  }
  s.at_most("analytic curve, frame equation residual on [0,0.9]", frame_residual, 1e-6);
  s.at_most("analytic curve, Christoffel residual on [0,0.9]", christoffel_residual, 1e-6);
  return s.finish();
}

SuiteResult beltrami(std::uint64_t seed) {
  Suite s("beltrami", "geodesic maps preserve constant curvature");
  const Geometry klein = catalog("hyperbolic-klein:2");
  const Geometry hyp = catalog("hyperbolic:2");
  const Geometry euc = catalog("euclidean:2");
  const auto id = [](const Vector& v) { return v; };
  const std::vector<double> grid = {0.25, 0.5, 1.0, 2.0};
  const MapReport good = verify_geodesic_map(
      {klein, hyp, Matrix::Identity(2, 2), base_point(klein), base_point(hyp), id, id}, 10, grid, 1e-6, seed);
  s.at_most("hyperbolic-klein:2 -> hyperbolic:2 mismatch", good.max_mismatch, 1e-6);
  s.holds("both constant curvature", good.source_probe.constant && good.target_probe.constant);
  s.holds("verdict: geodesic map", good.is_geodesic_map);
  const auto down = [](const Vector& v) { return Vector(v.tail(2)); };
  const auto up = [](const Vector& y) {
    Vector v(3);
    v << std::sqrt(1 + y.squaredNorm()), y[0], y[1];
    return v;
  };
  const MapReport bad = verify_geodesic_map(
      {hyp, euc, Matrix::Identity(2, 2), base_point(hyp), base_point(euc), down, up}, 10, grid, 1e-6, seed);
  s.at_least("hyperbolic:2 -> euclidean:2 mismatch", bad.max_mismatch, 0.1);
  s.holds("control verdict: not a geodesic map", !bad.is_geodesic_map);
  return s.finish();
}

SuiteResult jacobi(std::uint64_t seed) {
  Suite s("jacobi", "Jacobi fields agree with geodesic variations");
  const Geometry hyp = catalog("hyperbolic:2");
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const JacobiTrace t = jacobi_field({hyp, random_point(hyp, rng), rng.uniform_vector(2, -1, 1), 0, 2, 0.01},
                                       {rng.uniform_vector(2, -1, 1), rng.uniform_vector(2, -1, 1)}, 1e-2);
    worst = std::max(worst, t.max_discrepancy);
  }
  s.at_most("ODE vs variation, 10 problems on [0,2]", worst, 1e-4);
  const JacobiTrace normal =
      jacobi_field({hyp, base_point(hyp), vec2(1, 0), 0, 2, 0.01}, {vec2(0, 0), vec2(0, 1)}, 1e-3, false);
  double dev = 0.0;
  for (const JacobiSample& sample : normal.samples)
    dev = std::max(dev, std::abs(sample.state.j.norm() - std::sinh(sample.t)));
  s.at_most("|J(t)| - sinh t", dev, 1e-4);
  return s.finish();
}

SuiteResult integrator_order(std::uint64_t seed) {
  Suite s("integrator-order", "RK4 transport and development are fourth order");
  const Geometry hyp = catalog("hyperbolic:2");
  Rng rng(seed);
  const Vector a = rng.uniform_vector(3, 0.3, 0.8), v = rng.uniform_vector(2, -1, 1);
  const LiftedCurve c = exp_path(
      *hyp.mutation(), Matrix::Identity(3, 3),
      [a](double t) {
        Vector x(3);
        x << a[0] * std::sin(t), a[1] * t * t, a[2] * t;
        return AlgebraVector(x);
      },
      [a](double t) {
        Vector x(3);
        x << a[0] * std::cos(t), 2 * a[1] * t, a[2];
        return AlgebraVector(x);
      },
      0, 2);
  const Vector reference = parallel_transport(hyp, c, v, 0, 2, 0.2 / 64);
  const double e1 = (parallel_transport(hyp, c, v, 0, 2, 0.2) - reference).norm();
  const double e2 = (parallel_transport(hyp, c, v, 0, 2, 0.1) - reference).norm();
  s.at_least("transport error ratio", e1 / e2, 12.0);
  const Matrix fine = develop(hyp, c, 0, 2, 0.2 / 64).samples.back().frame;
  const double d1 = max_abs(develop(hyp, c, 0, 2, 0.2).samples.back().frame - fine);
  const double d2 = max_abs(develop(hyp, c, 0, 2, 0.1).samples.back().frame - fine);
  s.at_least("development error ratio", d1 / d2, 12.0);
  return s.finish();
}

const std::map<std::string, std::function<SuiteResult(std::uint64_t)>>& registry() {
  static const std::map<std::string, std::function<SuiteResult(std::uint64_t)>> suites = {
      {"beltrami", beltrami},
      {"clifton-pohl", clifton_pohl},
      {"closed-form", closed_form},
      {"curvature", curvature_suite},
      {"development", development},
      {"hopf-rinow", hopf_rinow},
      {"identities", identities},
      {"integrator-order", integrator_order},
      {"jacobi", jacobi},
      {"klein-flatness", klein_flatness},
      {"parallel-velocity", parallel_velocity},
      {"sl2-counterexample", sl2_counterexample},
  };
  return suites;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw Error(ErrorKind::InvalidArgument, "unknown suite '" + name + "'");
  try {
    return it->second(seed);
  } catch (const std::exception& e) {
    SuiteResult failed;
    failed.name = name;
    failed.error = e.what();
    return failed;
  }
}

std::vector<SuiteResult> run_suites(const std::vector<std::string>& names, std::uint64_t seed) {
  for (const std::string& name : names)
    if (!registry().count(name)) throw Error(ErrorKind::InvalidArgument, "unknown suite '" + name + "'");
  std::vector<std::future<SuiteResult>> jobs;
  for (const std::string& name : names) jobs.push_back(std::async(std::launch::async, run_suite, name, seed));
  std::vector<SuiteResult> out;
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

Json suite_to_json(const SuiteResult& result) {
  Json checks = Json::array();
  for (const CheckLine& c : result.checks)
    checks.push_back({{"label", c.label},
                      {"value", c.value},
                      {"bound", c.bound},
                      {"relation", c.at_most ? "<=" : ">="},
                      {"pass", c.pass}});
  Json out = {{"name", result.name}, {"title", result.title}, {"verdict", result.pass ? "pass" : "fail"},
              {"checks", checks}};
  if (!result.error.empty()) out["error"] = result.error;
  return out;
}

}  // namespace cartan
