#include "cartan/transport.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cartan/calculus.hpp"
#include "cartan/error.hpp"
#include "cartan/rk4.hpp"

namespace cartan {

namespace {

constexpr double kMaxChartSpeed = 1e8;
constexpr double kMinSubstep = 1e-12;
constexpr double kChartScale = 0.25;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TraceSample mutation_sample(const MutationGeometry& m, double t, const Matrix& p, const Vector& x) {
  return {t, m.base_coords(p), p, x};
}

Trace mutation_geodesic(const GeodesicSpec& spec, const MutationGeometry& m) {
  const Matrix generator = m.bundle_matrix(m.model().from_m(spec.direction));
  Trace trace;
  const double span = spec.t1 - spec.t0;
  const int n = std::max(1, static_cast<int>(std::ceil(span / spec.step - 1e-9)));
  for (int k = 0; k <= n; ++k) {
    const double t = k == n ? spec.t1 : spec.t0 + k * spec.step;
    const Matrix p = spec.base.g * group_exp((t - spec.t0) * generator);
    trace.samples.push_back(mutation_sample(m, t, p, spec.direction));
  }
  return trace;
}

Trace gauge_geodesic(const GeodesicSpec& spec) {
  const Geometry& geometry = spec.geometry;
  const GaugeGeometry& gauge = *geometry.gauge();
  const ModelPair& model = gauge.model();
  const AlgebraVector x = model.from_m(spec.direction);
  auto rhs = [&](double, const ChartState& s) {
    const BundleTangent v = frame_tangent(geometry, BundlePoint::chart(s.x, s.h), x);
    return ChartState{v.dx, v.dg};
  };
  // omega_m only sees Ad_{h^{-1}} A_x(xdot); the unchecked projection keeps
  // sampling robust when h grows large near a blow-up.
  auto sample = [&](double t, const ChartState& s, const ChartState& velocity) {
    const MatrixAlgebra& g = model.algebra();
    const Matrix a = g.matrix(gauge.connection(s.x) * velocity.x);
    return TraceSample{t, s.x, s.h, model.m_part(g.coords(s.h.inverse() * a * s.h))};
  };

  Trace trace;
  ChartState state{spec.base.x, spec.base.g};
  if (!gauge.domain().contains(state.x)) {
    trace.status = TraceStatus::LeftChart;
    trace.t_stop = spec.t0;
    return trace;
  }
  ChartState velocity = rhs(spec.t0, state);
  trace.samples.push_back(sample(spec.t0, state, velocity));
  if (velocity.x.norm() > kMaxChartSpeed) {
    trace.status = TraceStatus::BlowUp;
    trace.t_stop = spec.t0;
    return trace;
  }

  double t = spec.t0;
  double substep = spec.step;
  const double eps = 1e-12 * std::max(1.0, std::abs(spec.t1));
  while (t < spec.t1 - eps) {
    const double target = std::min(t + spec.step, spec.t1);
    while (t < target - eps) {
      const double hs = std::min(substep, target - t);
      bool left_domain = false;
      bool ok = false;
      ChartState next;
      ChartState next_velocity;
      try {
        next = rk4_step(rhs, t, state, hs);
        if (!next.x.allFinite() || !next.h.allFinite()) {
          ok = false;
        } else if (!gauge.domain().contains(next.x)) {
          left_domain = true;
        } else {
          next_velocity = rhs(t + hs, next);
          ok = next_velocity.x.allFinite();
        }
      } catch (const Error& e) {
        left_domain = e.kind() == ErrorKind::OutOfChart;
      }
      if (ok && next_velocity.x.norm() > kMaxChartSpeed) {
        trace.samples.push_back(sample(t + hs, next, next_velocity));
        trace.status = TraceStatus::BlowUp;
        trace.t_stop = t + hs;
        return trace;
      }
      if (ok) {
        const double speed = std::max(velocity.x.norm(), next_velocity.x.norm());
        const double scale = 1.0 + std::max(state.x.norm(), next.x.norm());
        ok = speed * hs <= kChartScale * scale;
      }
      if (!ok) {
        substep = hs / 2.0;
        if (substep < kMinSubstep) {
          trace.status = left_domain && velocity.x.norm() <= kMaxChartSpeed ? TraceStatus::LeftChart
                                                                            : TraceStatus::BlowUp;
          trace.t_stop = t;
          return trace;
        }
        continue;
      }
      t += hs;
      state = std::move(next);
      velocity = std::move(next_velocity);
      substep = std::min(spec.step, 2.0 * hs);
    }
    t = target;
    state.h = gauge.model_group().project(state.h, 1);
    trace.samples.push_back(sample(t, state, velocity));
  }
  return trace;
}

}  // namespace

std::string Trace::status_string() const {
  switch (status) {
    case TraceStatus::Completed:
      return "Completed";
    case TraceStatus::BlowUp:
      return "BlowUp:t=" + format_double(t_stop);
    case TraceStatus::LeftChart:
      return "LeftChart:t=" + format_double(t_stop);
  }
  return "Completed";
}

Trace geodesic(const GeodesicSpec& spec) {
  const ModelPair& model = spec.geometry.model();
  if (spec.direction.size() != model.dim_m())
    throw Error(ErrorKind::InvalidDimension, "geodesic direction must have dim m coordinates");
  if (!(spec.step > 0.0) || !(spec.t1 > spec.t0) || spec.step > spec.t1 - spec.t0 + 1e-15)
    throw Error(ErrorKind::InvalidArgument, "geodesic needs t0 < t1 and 0 < step <= t1 - t0");
  if (const auto* m = spec.geometry.mutation()) return mutation_geodesic(spec, *m);
  return gauge_geodesic(spec);
}

LiftedCurve geodesic_lift(const MutationGeometry& geometry, const Matrix& base, const Vector& x_m) {
  const AlgebraVector x = geometry.model().from_m(x_m);
  const Matrix generator = geometry.bundle_matrix(x);
  LiftedCurve c;
  c.point = [base, generator](double t) { return BundlePoint::group(base * group_exp(t * generator)); };
  c.velocity = [x](double) { return x; };
  c.t_min = -std::numeric_limits<double>::infinity();
  c.t_max = std::numeric_limits<double>::infinity();
  return c;
}

LiftedCurve twisted_geodesic_lift(const MutationGeometry& geometry, const Matrix& base, const Vector& x_m,
                                  const Vector& y_h) {
  const ModelPair& model = geometry.model();
  const AlgebraVector x = model.from_m(x_m), y = model.from_h(y_h);
  const Matrix xi = geometry.bundle_matrix(x), eta = geometry.bundle_matrix(y);
  const Matrix y_model = model.algebra().matrix(y);
  const MatrixAlgebra algebra = model.algebra();
  LiftedCurve c;
  c.point = [=](double t) { return BundlePoint::group(base * group_exp(t * xi) * group_exp(t * eta)); };
  c.velocity = [=](double t) { return AlgebraVector(adjoint(group_exp(-t * y_model), x, algebra) + y); };
  c.t_min = -std::numeric_limits<double>::infinity();
  c.t_max = std::numeric_limits<double>::infinity();
  return c;
}

LiftedCurve exp_path(const MutationGeometry& geometry, const Matrix& base, std::function<AlgebraVector(double)> f,
                     std::function<AlgebraVector(double)> f_prime, double t_min, double t_max) {
  auto geo = std::make_shared<const MutationGeometry>(geometry);
  LiftedCurve c;
  c.point = [geo, base, f](double t) { return BundlePoint::group(base * group_exp(geo->bundle_matrix(f(t)))); };
  c.velocity = [geo, f, f_prime](double t) {
    const AlgebraVector big_f = geo->to_bundle(f(t));
    return AlgebraVector(geo->to_model(phi1(-geo->bundle_algebra().ad(big_f)) * geo->to_bundle(f_prime(t))));
  };
  c.t_min = t_min;
  c.t_max = t_max;
  return c;
}

LiftedCurve chart_lift(const GaugeGeometry& gauge, std::function<Vector(double)> x,
                       std::function<Vector(double)> x_prime, double t_min, double t_max) {
  auto geo = std::make_shared<const GaugeGeometry>(gauge);
  const int n = gauge.model().algebra().ambient_dim();
  LiftedCurve c;
  c.point = [x, n](double t) { return BundlePoint::chart(x(t), Matrix::Identity(n, n)); };
  c.velocity = [geo, x, x_prime](double t) { return AlgebraVector(geo->connection(x(t)) * x_prime(t)); };
  c.t_min = t_min;
  c.t_max = t_max;
  return c;
}

Vector parallel_transport(const Geometry& geometry, const LiftedCurve& curve, const Vector& v, double t0, double t1,
                          double step) {
  const ModelPair& model = geometry.model();
  if (v.size() != model.dim_m()) throw Error(ErrorKind::InvalidDimension, "transported vector must lie in m");
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(t0), std::abs(t1)));
  if (std::min(t0, t1) < curve.t_min - slack || std::max(t0, t1) > curve.t_max + slack)
    throw Error(ErrorKind::DomainError, "curve is not defined on the requested interval");
  const MatrixAlgebra& g = model.algebra();
  auto rhs = [&](double t, const Vector& y) {
    return Vector(model.m_part(bracket(g, model.from_m(y), model.project_h(curve.velocity(t)))));
  };
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / step - 1e-9)));
  const double h = (t1 - t0) / n;
  Vector y = v;
  for (int k = 0; k < n; ++k) y = rk4_step(rhs, t0 + k * h, y, h);
  return y;
}

Vector model_base_coords(const Geometry& geometry, const Matrix& g) {
  if (const auto* m = geometry.mutation(); m != nullptr && m->is_klein()) return m->base_coords(g);
  const GroupStructure& group = geometry.model_group();
  if (group.blocks.size() == 1 && (group.blocks[0].kind == BlockKind::AffineGeneral ||
                                   group.blocks[0].kind == BlockKind::AffinePseudoOrthogonal)) {
    const int n = group.ambient_dim;
    return g.col(n - 1).head(n - 1);
  }
  throw Error(ErrorKind::Unsupported, "model group has no registered base-point embedding");
}

Trace develop(const Geometry& geometry, const LiftedCurve& curve, double t0, double t1, double step) {
  const ModelPair& model = geometry.model();
  const GroupStructure& group = geometry.model_group();
  if (group.ambient_dim != model.algebra().ambient_dim())
    throw Error(ErrorKind::Unsupported, "model algebra has no faithful matrix group registered");
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  if (std::min(t0, t1) < curve.t_min || std::max(t0, t1) > curve.t_max)
    throw Error(ErrorKind::DomainError, "curve is not defined on the requested interval");
  const MatrixAlgebra& g = model.algebra();
  auto rhs = [&](double t, const Matrix& y) { return Matrix(y * g.matrix(curve.velocity(t))); };
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / step - 1e-9)));
  const double h = (t1 - t0) / n;
  Matrix y = Matrix::Identity(group.ambient_dim, group.ambient_dim);
  Trace trace;
  auto push = [&](double t) {
    trace.samples.push_back({t, model_base_coords(geometry, y), y, model.m_part(curve.velocity(t))});
  };
  push(t0);
  for (int k = 0; k < n; ++k) {
    y = group.project(rk4_step(rhs, t0 + k * h, y, h), 1);
    push(k + 1 == n ? t1 : t0 + (k + 1) * h);
  }
  return trace;
}

Vector jacobi_acceleration(const MutationGeometry& geometry, const Vector& x, const JacobiState& state) {
  const ModelPair& model = geometry.model();
  const MatrixAlgebra& g = model.algebra();
  const AlgebraVector xv = model.from_m(x), j = model.from_m(state.j), jp = model.from_m(state.j_prime);
  const AlgebraVector omega =
      bracket(g, xv, j) - geometry.to_model(bracket(geometry.bundle_algebra(), geometry.to_bundle(xv), geometry.to_bundle(j)));
  const Vector transport_term = model.m_part(bracket(g, jp, xv));
  const Vector bracket_term = model.m_part(bracket(g, xv, model.project_h(bracket(g, j, xv))));
  const Vector curvature_term = model.m_part(bracket(g, xv, model.project_h(omega)));
  return transport_term - bracket_term - curvature_term;
}

JacobiTrace jacobi_field(const GeodesicSpec& spec, const JacobiState& init, double step, bool oracle) {
  const MutationGeometry* m = spec.geometry.mutation();
  if (m == nullptr) throw Error(ErrorKind::Unsupported, "Jacobi fields are only integrated on mutation models");
  const ModelPair& model = m->model();
  const int d = model.dim_m();
  if (spec.direction.size() != d || init.j.size() != d || init.j_prime.size() != d)
    throw Error(ErrorKind::InvalidDimension, "Jacobi data must lie in m");
  if (!(step > 0.0) || !(spec.t1 > spec.t0)) throw Error(ErrorKind::InvalidArgument, "need t0 < t1 and step > 0");

  const MatrixAlgebra& p_alg = m->bundle_algebra();
  const AlgebraVector xi = m->to_bundle(model.from_m(spec.direction));
  const AlgebraVector eta = m->to_bundle(model.from_m(init.j));
  const AlgebraVector zeta =
      m->to_bundle(model.from_m(init.j_prime + model.m_part(m->to_model(bracket(p_alg, xi, eta)))));
  const double s = 1e-4;
  const Matrix start_plus = spec.base.g * group_exp(p_alg.matrix(s * eta));
  const Matrix start_minus = spec.base.g * group_exp(p_alg.matrix(-s * eta));
  auto variation = [&](double t) {
    const double tau = t - spec.t0;
    const Matrix center = spec.base.g * group_exp(p_alg.matrix(tau * xi));
    const Matrix plus = start_plus * group_exp(p_alg.matrix(tau * (xi + s * zeta)));
    const Matrix minus = start_minus * group_exp(p_alg.matrix(tau * (xi - s * zeta)));
    const AlgebraVector rel = p_alg.coords(center.inverse() * (plus - minus) / (2.0 * s));
    return Vector(model.m_part(m->to_model(rel)));
  };

  auto rhs = [&](double, const Vector& y) {
    Vector out(2 * d);
    out.head(d) = y.tail(d);
    out.tail(d) = jacobi_acceleration(*m, spec.direction, {y.head(d), y.tail(d)});
    return out;
  };
  JacobiTrace trace;
  Vector y(2 * d);
  y << init.j, init.j_prime;
  const int n = std::max(1, static_cast<int>(std::ceil((spec.t1 - spec.t0) / step - 1e-9)));
  const double h = (spec.t1 - spec.t0) / n;
  for (int k = 0; k <= n; ++k) {
    const double t = k == n ? spec.t1 : spec.t0 + k * h;
    if (k > 0) y = rk4_step(rhs, spec.t0 + (k - 1) * h, y, h);
    JacobiSample sample{t, {y.head(d), y.tail(d)}, Vector()};
    if (oracle) {
      sample.oracle = variation(t);
      trace.max_discrepancy = std::max(trace.max_discrepancy, (sample.oracle - sample.state.j).cwiseAbs().maxCoeff());
    }
    trace.samples.push_back(std::move(sample));
  }
  return trace;
}

// --- CSV ------------------------------------------------------------------

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const Eigen::Index d = trace.samples.empty() ? 0 : trace.samples.front().base.size();
  const Eigen::Index rows = trace.samples.empty() ? 0 : trace.samples.front().frame.rows();
  const Eigen::Index cols = trace.samples.empty() ? 0 : trace.samples.front().frame.cols();
  const Eigen::Index dm = trace.samples.empty() ? 0 : trace.samples.front().velocity_m.size();
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x" << i + 1;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out << ",frame" << r << c;
  for (Eigen::Index i = 0; i < dm; ++i) out << ",vel_m" << i + 1;
  out << "\n";
  for (const TraceSample& s : trace.samples) {
    out << format_double(s.t);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(s.base[i]);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) out << ',' << format_double(s.frame(r, c));
    for (Eigen::Index i = 0; i < dm; ++i) out << ',' << format_double(s.velocity_m[i]);
    out << "\n";
  }
  out << "# status=" << trace.status_string() << "\n";
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty trace file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "t") throw Error(ErrorKind::ParseError, "trace header must start with 't'");
  int d = 0, frame = 0, dm = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].rfind("frame", 0) == 0) ++frame;
    else if (header[i].rfind("vel_m", 0) == 0) ++dm;
    else if (header[i].rfind('x', 0) == 0) ++d;
    else throw Error(ErrorKind::ParseError, "unknown trace column '" + header[i] + "'");
  }
  const int n = static_cast<int>(std::lround(std::sqrt(frame)));
  if (n * n != frame) throw Error(ErrorKind::ParseError, "frame columns do not form a square matrix");

  Trace trace;
  bool have_status = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# status=";
      if (line.rfind(key, 0) != 0) continue;
      const std::string status = line.substr(key.size());
      have_status = true;
      if (status == "Completed") {
        trace.status = TraceStatus::Completed;
      } else {
        const auto colon = status.find(":t=");
        if (colon == std::string::npos) throw Error(ErrorKind::ParseError, "bad status line");
        const std::string kind = status.substr(0, colon);
        if (kind == "BlowUp") trace.status = TraceStatus::BlowUp;
        else if (kind == "LeftChart") trace.status = TraceStatus::LeftChart;
        else throw Error(ErrorKind::ParseError, "unknown status '" + kind + "'");
        trace.t_stop = std::stod(status.substr(colon + 3));
      }
      continue;
    }
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "bad number '" + cell + "' in trace");
      }
    }
    if (values.size() != header.size()) throw Error(ErrorKind::ParseError, "row width differs from the header");
    TraceSample s;
    s.t = values[0];
    s.base = Eigen::Map<const Vector>(values.data() + 1, d);
    s.frame.resize(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) s.frame(r, c) = values[1 + d + r * n + c];
    s.velocity_m = Eigen::Map<const Vector>(values.data() + 1 + d + frame, dm);
    trace.samples.push_back(std::move(s));
  }
  if (!have_status) throw Error(ErrorKind::ParseError, "trace has no status line");
  return trace;
}

void write_jacobi_csv(std::ostream& out, const JacobiTrace& trace) {
  const Eigen::Index d = trace.samples.empty() ? 0 : trace.samples.front().state.j.size();
  const bool oracle = !trace.samples.empty() && trace.samples.front().oracle.size() > 0;
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) out << ",j" << i + 1;
  for (Eigen::Index i = 0; i < d; ++i) out << ",jp" << i + 1;
  if (oracle)
    for (Eigen::Index i = 0; i < d; ++i) out << ",oracle" << i + 1;
  out << "\n";
  for (const JacobiSample& s : trace.samples) {
    out << format_double(s.t);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(s.state.j[i]);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(s.state.j_prime[i]);
    if (oracle)
      for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(s.oracle[i]);
    out << "\n";
  }
  if (oracle) out << "# max_discrepancy=" << format_double(trace.max_discrepancy) << "\n";
}

}  // namespace cartan
