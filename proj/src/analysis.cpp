#include "cartan/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cartan/error.hpp"

namespace cartan {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

std::vector<double> trotter_probe(const MatrixAlgebra& algebra, const AlgebraVector& x, const AlgebraVector& y,
                                  double t, const std::vector<int>& n_list) {
  algebra.check_dim(x);
  algebra.check_dim(y);
  const Matrix xm = algebra.matrix(x), ym = algebra.matrix(y);
  const Matrix exact = group_exp(t * (xm + ym));
  std::vector<double> errors;
  for (int n : n_list) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "trotter_probe needs n >= 1");
    const Matrix step = group_exp((t / n) * xm) * group_exp((t / n) * ym);
    Matrix product = Matrix::Identity(step.rows(), step.cols());
    for (int k = 0; k < n; ++k) product = product * step;
    errors.push_back((product - exact).norm());
  }
  return errors;
}

std::string to_string(CompletenessVerdict verdict) {
  return verdict == CompletenessVerdict::CompleteUpToHorizon ? "CompleteUpToHorizon" : "IncompleteWitness";
}

CompletenessReport completeness_report(const Geometry& geometry, double horizon, int n_directions,
                                       std::uint64_t seed, double step) {
  if (!(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  if (n_directions < 0) throw Error(ErrorKind::InvalidArgument, "n_directions must be non-negative");
  const ModelPair& model = geometry.model();
  const int dm = model.dim_m();
  Rng rng(seed);
  std::vector<Vector> directions;
  for (int k = 0; k < n_directions; ++k) directions.push_back(rng.unit_vector(dm));
  for (int i = 0; i < dm; ++i) directions.push_back(Vector::Unit(dm, i));
  if (const auto* gauge = geometry.gauge(); gauge != nullptr && gauge->metric() != nullptr) {
    const Vector& eta = gauge->metric()->eta();
    for (int i = 0; i < dm; ++i)
      for (int j = i + 1; j < dm; ++j)
        if (eta[i] != eta[j]) {
          directions.push_back((Vector::Unit(dm, i) + Vector::Unit(dm, j)) / std::sqrt(2.0));
          directions.push_back((Vector::Unit(dm, i) - Vector::Unit(dm, j)) / std::sqrt(2.0));
        }
  }

  CompletenessReport report;
  report.horizon = horizon;
  report.seed = seed;
  const BundlePoint base = base_point(geometry);
  const double trace_step = geometry.is_mutation() ? horizon : std::min(step, horizon);
  for (const Vector& dir : directions)
    for (double sign : {1.0, -1.0}) {
      const Trace trace = geodesic({geometry, base, sign * dir, 0.0, horizon, trace_step});
      DirectionRecord record{sign * dir, horizon, trace.status};
      if (trace.status == TraceStatus::Completed && !trace.samples.back().frame.allFinite())
        record.status = TraceStatus::BlowUp;
      if (record.status != TraceStatus::Completed)
        record.max_time = trace.status == TraceStatus::Completed ? horizon : trace.t_stop;
      if (record.status != TraceStatus::Completed && (!report.witness || record.max_time < report.witness->max_time))
        report.witness = record;
      report.records.push_back(std::move(record));
    }
  report.verdict = report.witness ? CompletenessVerdict::IncompleteWitness : CompletenessVerdict::CompleteUpToHorizon;

  // Vertical flows are right translations and exist for all time.
  for (int k = 0; k < model.dim_h(); ++k)
    for (double t : {horizon, -horizon}) {
      const Vector coords = t * Vector::Unit(model.dim_h(), k);
      const BundlePoint p = right_translate(geometry, base, h_element(geometry, coords));
      const AlgebraVector y = model.from_h(Vector::Unit(model.dim_h(), k));
      const Matrix generator =
          geometry.is_mutation() ? geometry.mutation()->bundle_matrix(y) : model.algebra().matrix(y);
      if (!p.g.allFinite()) {
        report.vertical_complete = false;
        continue;
      }
      const BundleTangent v{geometry.is_mutation() ? Vector() : Vector::Zero(p.x.size()), p.g * generator};
      const AlgebraVector omega = connection_at(geometry, p, v);
      report.vertical_residual = std::max(report.vertical_residual, (omega - y).cwiseAbs().maxCoeff());
    }
  if (report.vertical_residual > 1e-6) report.vertical_complete = false;
  return report;
}

ConnectResult search_geodesic(const Geometry& geometry, const Matrix& p, const Matrix& q, std::uint64_t seed,
                              ConnectBudget budget) {
  const MutationGeometry* m = geometry.mutation();
  if (m == nullptr || !m->is_klein())
    throw Error(ErrorKind::Unsupported, "connect_by_geodesic needs a Klein model (sigma = identity)");
  const ModelPair& model = m->model();
  const MatrixAlgebra& g = model.algebra();
  if (p.rows() != g.ambient_dim() || q.rows() != g.ambient_dim() || p.cols() != p.rows() || q.cols() != q.rows())
    throw Error(ErrorKind::InvalidDimension, "group elements have the wrong size");
  const Matrix target = p.inverse() * q;

  std::vector<Matrix> samples = {Matrix::Identity(g.ambient_dim(), g.ambient_dim())};
  for (const Matrix& h : model.h_samples(seed, std::max(0, budget.h_samples))) samples.push_back(h);
  if (static_cast<int>(samples.size()) > budget.h_samples) samples.resize(std::max(1, budget.h_samples));

  const int dm = model.dim_m(), dh = model.dim_h();
  ConnectResult result;
  for (const Matrix& h0 : samples) {
    ++result.attempts;
    const Matrix gh = target * h0;
    auto residual = [&](const Vector& z) {
      const Matrix rel = group_exp(-g.matrix(model.from_m(z.head(dm)))) * gh *
                         group_exp(g.matrix(model.from_h(z.tail(dh))));
      return Vector(g.coords(group_log(rel)));
    };
    Vector z = Vector::Zero(dm + dh);
    try {
      z.head(dm) = model.m_part(g.coords(group_log(gh)));
      for (int it = 0; it < budget.newton_iterations; ++it) {
        const Vector r = residual(z);
        if (r.cwiseAbs().maxCoeff() < 1e-14) break;
        Matrix jac(r.size(), dm + dh);
        for (int k = 0; k < dm + dh; ++k) {
          const double hstep = 1e-7;
          Vector zp = z, zm = z;
          zp[k] += hstep;
          zm[k] -= hstep;
          jac.col(k) = (residual(zp) - residual(zm)) / (2 * hstep);
        }
        z -= jac.colPivHouseholderQr().solve(r);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PrincipalLogUndefined && e.kind() != ErrorKind::NumericalFailure) throw;
      ++result.log_failures;
      continue;
    }
    if (!z.allFinite()) continue;
    const Matrix h = h0 * group_exp(g.matrix(model.from_h(z.tail(dh))));
    const double err = max_abs(group_exp(g.matrix(model.from_m(z.head(dm)))) - target * h);
    if (err <= 1e-8) {
      result.found = true;
      result.x_m = z.head(dm);
      result.h = h;
      result.residual = err;
      return result;
    }
  }
  return result;
}

Vector connect_by_geodesic(const Geometry& geometry, const Matrix& p, const Matrix& q, std::uint64_t seed,
                           ConnectBudget budget) {
  const ConnectResult r = search_geodesic(geometry, p, q, seed, budget);
  if (!r.found)
    throw Error(ErrorKind::NoGeodesicFound, "no geodesic found after " + std::to_string(r.attempts) +
                                                " H-samples x " + std::to_string(budget.newton_iterations) +
                                                " Newton iterations");
  return r.x_m;
}

bool sl2_in_exp_image(const Matrix& a) {
  if (a.rows() != 2 || a.cols() != 2) throw Error(ErrorKind::InvalidDimension, "expected a 2x2 matrix");
  if (a.trace() > -2.0) return true;
  return max_abs(a + Matrix::Identity(2, 2)) <= 1e-12;
}

GeodesicMapSpec swapped(const GeodesicMapSpec& spec) {
  return {spec.target, spec.source, spec.phi.inverse(), spec.target_base, spec.source_base, spec.inverse_point_map,
          spec.point_map};
}

MapReport verify_geodesic_map(const GeodesicMapSpec& spec, int n_geodesics, const std::vector<double>& t_grid,
                              double tolerance, std::uint64_t seed, double step) {
  const int ds = spec.source.model().dim_m(), dt = spec.target.model().dim_m();
  if (spec.phi.rows() != dt || spec.phi.cols() != ds)
    throw Error(ErrorKind::InvalidDimension, "phi must map m_source to m_target");
  if (ds != dt || std::abs(spec.phi.determinant()) < 1e-12)
    throw Error(ErrorKind::NotAnIsomorphism, "phi must be invertible");
  MapReport report;
  report.t_grid = t_grid;
  report.tolerance = tolerance;
  auto endpoint = [&](const Geometry& geo, const BundlePoint& base, const Vector& x, double t) -> std::optional<Vector> {
    const double s = geo.is_mutation() ? t : std::min(step, t);
    const Trace trace = geodesic({geo, base, x, 0.0, t, s});
    if (trace.status != TraceStatus::Completed) return std::nullopt;
    return trace.samples.back().base;
  };
  Rng rng(seed);
  for (int k = 0; k < n_geodesics; ++k) {
    const Vector x = rng.unit_vector(ds);
    const Vector y = spec.phi * x;
    double worst = 0.0;
    for (double t : t_grid) {
      const auto a = endpoint(spec.source, spec.source_base, x, t);
      const auto b = endpoint(spec.target, spec.target_base, y, t);
      worst = a && b ? std::max(worst, (spec.point_map(*a) - *b).norm()) : std::numeric_limits<double>::infinity();
    }
    report.mismatches.push_back(worst);
    report.max_mismatch = std::max(report.max_mismatch, worst);
  }
  report.geodesics_match = report.max_mismatch <= tolerance;
  report.source_probe = constant_curvature_probe(spec.source, 20, seed);
  report.target_probe = constant_curvature_probe(spec.target, 20, seed);
  report.beltrami_consistent = !report.source_probe.constant || report.target_probe.constant;
  report.is_geodesic_map = report.geodesics_match && report.beltrami_consistent;
  return report;
}

double mutation_relation_residual(const Geometry& source, const Geometry& target, const Matrix& phi, int n_samples,
                                  std::uint64_t seed) {
  const MutationGeometry* s = source.mutation();
  const MutationGeometry* t = target.mutation();
  if (s == nullptr || t == nullptr)
    throw Error(ErrorKind::Unsupported, "the mutation relation compares two mutation models");
  if (s->bundle_algebra().dim() != t->bundle_algebra().dim() ||
      s->bundle_algebra().ambient_dim() != t->bundle_algebra().ambient_dim())
    throw Error(ErrorKind::InvalidDimension, "models must share the bundle group");
  const Matrix map = t->sigma() * s->sigma_inv();
  const ModelPair& ms = s->model();
  const ModelPair& mt = t->model();
  double worst = 0.0;
  for (int i = 0; i < mt.dim_m(); ++i)
    for (int j = 0; j < ms.dim_m(); ++j)
      worst = std::max(worst, std::abs(map(mt.m_indices()[i], ms.m_indices()[j]) - phi(i, j)));
  Rng rng(seed);
  for (int k = 0; k < n_samples; ++k) {
    const BundlePoint p = random_point(source, rng);
    const BundleTangent v{Vector(), p.g * s->bundle_algebra().matrix(rng.uniform_vector(s->bundle_algebra().dim(), -1, 1))};
    const AlgebraVector ws = connection_at(source, p, v);
    const AlgebraVector wt = connection_at(target, p, v);
    worst = std::max(worst, (wt - map * ws).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace cartan
