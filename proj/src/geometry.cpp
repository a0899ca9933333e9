#include "cartan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cartan/error.hpp"
#include "cartan/rk4.hpp"

namespace cartan {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

// --- MutationGeometry -------------------------------------------------------

MutationGeometry::MutationGeometry(std::string name, MatrixAlgebra bundle_algebra, ModelPair model, Matrix sigma,
                                   MutationLayout layout)
    : name_(std::move(name)),
      bundle_(std::move(bundle_algebra)),
      model_(std::move(model)),
      sigma_(std::move(sigma)),
      layout_(std::move(layout)) {
  const int n = model_.dim();
  if (bundle_.dim() != n || sigma_.rows() != n || sigma_.cols() != n)
    throw Error(ErrorKind::InvalidDimension, "sigma must be a square map between algebras of equal dimension");
  if (layout_.bundle_group.ambient_dim != bundle_.ambient_dim() ||
      layout_.model_group.ambient_dim != model_.algebra().ambient_dim())
    throw Error(ErrorKind::InvalidDimension, "group structure does not match the algebra's matrix size");
  for (const auto& [r, c] : layout_.base_entries)
    if (r < 0 || c < 0 || r >= bundle_.ambient_dim() || c >= bundle_.ambient_dim())
      throw Error(ErrorKind::InvalidDimension, "base entry outside the bundle matrix");

  if (!sigma_.allFinite()) throw Error(ErrorKind::NotAnIsomorphism, "sigma has non-finite entries");
  const Eigen::JacobiSVD<Matrix> svd(sigma_);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv.minCoeff() <= 1e-12 * std::max(1.0, sv.maxCoeff()))
    throw Error(ErrorKind::NotAnIsomorphism, "sigma is singular");
  sigma_inv_ = sigma_.inverse();
  if (max_abs(sigma_inv_ * sigma_ - Matrix::Identity(n, n)) > 1e-11)
    throw Error(ErrorKind::NotAnIsomorphism, "sigma is too ill-conditioned to invert");

  if (!validate_reductive(model_).passed())
    throw Error(ErrorKind::InvalidMutation, "model pair of '" + name_ + "' is not reductive");

  const MatrixAlgebra& g = model_.algebra();
  for (int a : model_.h_indices())
    for (int b : model_.h_indices()) {
      AlgebraVector ya = AlgebraVector::Zero(n), yb = AlgebraVector::Zero(n);
      ya[a] = 1.0;
      yb[b] = 1.0;
      const AlgebraVector lhs = to_model(bracket(bundle_, to_bundle(ya), to_bundle(yb)));
      const AlgebraVector rhs = bracket(g, ya, yb);
      if ((lhs - rhs).cwiseAbs().maxCoeff() > tol::round_trip)
        throw Error(ErrorKind::InvalidMutation, "sigma is not a homomorphism on h");
    }

  if (model_.dim_h() > 0) {
    Rng rng(7);
    std::vector<AlgebraVector> samples;
    for (int idx : model_.h_indices())
      for (double t : {0.1, -0.1, 1.0, -1.0}) {
        AlgebraVector y = AlgebraVector::Zero(n);
        y[idx] = t;
        samples.push_back(y);
      }
    for (int s = 0; s < 20; ++s) samples.push_back(model_.from_h(rng.uniform_vector(model_.dim_h(), -1.0, 1.0)));
    for (const AlgebraVector& y : samples) {
      const Matrix ad_p = adjoint_matrix(group_exp(bundle_matrix(y)), bundle_);
      const Matrix ad_g = adjoint_matrix(group_exp(g.matrix(y)), g);
      if (max_abs(sigma_ * ad_p - ad_g * sigma_) > tol::round_trip * std::max(1.0, max_abs(ad_g)))
        throw Error(ErrorKind::InvalidMutation, "sigma does not intertwine the adjoint action of H");
    }
  }
}

bool MutationGeometry::is_klein() const {
  const int n = model_.dim();
  if (max_abs(sigma_ - Matrix::Identity(n, n)) > 1e-14) return false;
  if (bundle_.ambient_dim() != model_.algebra().ambient_dim()) return false;
  for (int i = 0; i < n; ++i)
    if (max_abs(bundle_.basis()[i] - model_.algebra().basis()[i]) > 1e-14) return false;
  return true;
}

Vector MutationGeometry::base_coords(const Matrix& p) const {
  Vector out(static_cast<Eigen::Index>(layout_.base_entries.size()));
  for (std::size_t i = 0; i < layout_.base_entries.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = p(layout_.base_entries[i].first, layout_.base_entries[i].second);
  return out;
}

MutationGeometry build_mutation(const std::string& name, MatrixAlgebra bundle_algebra, ModelPair model,
                                const Matrix& sigma, MutationLayout layout) {
  return MutationGeometry(name, std::move(bundle_algebra), std::move(model), sigma, std::move(layout));
}

// --- ChartDomain ------------------------------------------------------------

bool ChartDomain::contains(const Vector& x) const {
  if (x.size() != dim() || !x.allFinite()) return false;
  for (int i = 0; i < dim(); ++i)
    if (x[i] < box[i].first || x[i] > box[i].second) return false;
  for (const Ball& b : excluded)
    if ((x - b.center).norm() <= b.radius) return false;
  return true;
}

std::vector<std::pair<double, double>> ChartDomain::sample_box() const {
  std::vector<std::pair<double, double>> out = box;
  for (int i = 0; i < dim(); ++i) {
    out[i].first = std::max(box[i].first, reference[i] - 2.0);
    out[i].second = std::min(box[i].second, reference[i] + 2.0);
  }
  return out;
}

// --- MetricGauge ------------------------------------------------------------

MetricGauge::MetricGauge(std::vector<std::vector<ExpressionAst>> entries, std::pair<int, int> signature,
                         const ChartDomain& domain, DerivativeMode mode)
    : entries_(std::move(entries)), signature_(signature), mode_(mode) {
  const int d = dim();
  for (const auto& row : entries_)
    if (static_cast<int>(row.size()) != d) throw Error(ErrorKind::InvalidDimension, "metric must be square");
  if (signature_.first < 0 || signature_.second < 0 || signature_.first + signature_.second != d)
    throw Error(ErrorKind::SignatureError, "signature does not add up to the chart dimension");
  if (domain.dim() != d) throw Error(ErrorKind::InvalidDimension, "domain dimension differs from the metric");
  if (!domain.contains(domain.reference))
    throw Error(ErrorKind::OutOfChart, "reference point lies outside the chart domain");
  eta_.resize(d);
  for (int i = 0; i < d; ++i) eta_[i] = i < signature_.first ? 1.0 : -1.0;

  const Matrix g = metric(domain.reference);
  const double scale = std::max(1.0, max_abs(g));
  if (max_abs(g - g.transpose()) > 1e-12 * scale)
    throw Error(ErrorKind::InvalidArgument, "metric is not symmetric at the reference point");
  const Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Vector lambda = es.eigenvalues();
  Matrix vecs = es.eigenvectors();
  auto lead_index = [&](int col) {
    int best = 0;
    for (int r = 1; r < d; ++r)
      if (std::abs(vecs(r, col)) > std::abs(vecs(best, col)) + 1e-12) best = r;
    return best;
  };
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(lambda[a] - lambda[b]) > 1e-12 * scale) return lambda[a] > lambda[b];
    return lead_index(a) < lead_index(b);
  });
  int positive = 0, negative = 0;
  basis_.resize(d, d);
  for (int k = 0; k < d; ++k) {
    const int col = order[k];
    if (std::abs(lambda[col]) <= 1e-12 * scale) throw Error(ErrorKind::DegenerateMetric, "metric is degenerate at the reference point");
    (lambda[col] > 0 ? positive : negative) += 1;
    Vector v = vecs.col(col);
    if (v[lead_index(col)] < 0.0) v = -v;
    basis_.col(k) = v;
  }
  if (positive != signature_.first || negative != signature_.second)
    throw Error(ErrorKind::SignatureError, "metric signature at the reference point is (" + std::to_string(positive) +
                                               "," + std::to_string(negative) + ")");
  basis_inv_ = basis_.inverse();

  // Sample the domain so that a bad declaration fails at build time.
  Rng rng(11);
  const auto box = domain.sample_box();
  for (int s = 0; s < 16; ++s) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.uniform(box[i].first, box[i].second);
    if (!domain.contains(x)) continue;
    factor(x);
  }
}

std::vector<std::vector<Dual>> MetricGauge::metric_duals(const Vector& x) const {
  const int d = dim();
  std::vector<std::vector<Dual>> out(d, std::vector<Dual>(d));
  if (mode_ == DerivativeMode::Analytic) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out[i][j] = entries_[i][j].evaluate_dual(x);
    return out;
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Dual v(entries_[i][j].evaluate(x), d);
      for (int k = 0; k < d; ++k) {
        const double step = 1e-6 * std::max(1.0, std::abs(x[k]));
        Vector xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        v.grad[k] = (entries_[i][j].evaluate(xp) - entries_[i][j].evaluate(xm)) / (2.0 * step);
      }
      out[i][j] = v;
    }
  return out;
}

Matrix MetricGauge::metric(const Vector& x) const {
  const int d = dim();
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = entries_[i][j].evaluate(x);
  return g;
}

MetricGauge::Factor MetricGauge::factor(const Vector& x) const {
  const int d = dim();
  const auto g = metric_duals(x);
  Factor f;
  f.g.resize(d, d);
  f.dg.assign(d, Matrix(d, d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (!std::isfinite(g[i][j].value) || !g[i][j].grad.allFinite())
        throw Error(ErrorKind::DegenerateMetric, "metric is not finite at the queried point");
      f.g(i, j) = g[i][j].value;
      for (int k = 0; k < d; ++k) f.dg[k](i, j) = g[i][j].grad[k];
    }
  const double scale = std::max(1.0, max_abs(f.g));

  // S = M^T g M, then S = L D L^T without pivoting.
  std::vector<std::vector<Dual>> s(d, std::vector<Dual>(d, Dual(0.0, d)));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double w = basis_(i, a) * basis_(j, b);
          if (w != 0.0) s[a][b] = s[a][b] + w * g[i][j];
        }
  std::vector<std::vector<Dual>> l(d, std::vector<Dual>(d, Dual(0.0, d)));
  std::vector<Dual> diag(d, Dual(0.0, d));
  for (int j = 0; j < d; ++j) {
    Dual dj = s[j][j];
    for (int k = 0; k < j; ++k) dj = dj - l[j][k] * l[j][k] * diag[k];
    if (!(std::abs(dj.value) > 1e-12 * scale)) throw Error(ErrorKind::DegenerateMetric, "metric is degenerate at the queried point");
    if ((dj.value > 0.0) != (eta_[j] > 0.0))
      throw Error(ErrorKind::SignatureError, "metric signature changes inside the chart");
    diag[j] = dj;
    l[j][j] = Dual(1.0, d);
    for (int i = j + 1; i < d; ++i) {
      Dual lij = s[i][j];
      for (int k = 0; k < j; ++k) lij = lij - l[i][k] * l[j][k] * diag[k];
      l[i][j] = lij / dj;
    }
  }
  f.e.resize(d, d);
  f.de.assign(d, Matrix(d, d));
  for (int a = 0; a < d; ++a) {
    const Dual root = sqrt(abs(diag[a]));
    for (int i = 0; i < d; ++i) {
      Dual acc(0.0, d);
      for (int b = a; b < d; ++b) acc = acc + basis_inv_(b, i) * l[b][a];
      const Dual e = root * acc;
      f.e(a, i) = e.value;
      for (int k = 0; k < d; ++k) f.de[k](a, i) = e.grad[k];
    }
  }
  return f;
}

Matrix MetricGauge::coframe(const Vector& x) const { return factor(x).e; }

std::vector<Matrix> MetricGauge::christoffel(const Vector& x) const {
  const Factor f = factor(x);
  const int d = dim();
  const Matrix ginv = f.g.inverse();
  std::vector<Matrix> gamma(d, Matrix::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l) acc += ginv(k, l) * (f.dg[i](l, j) + f.dg[j](l, i) - f.dg[l](i, j));
        gamma[k](i, j) = 0.5 * acc;
      }
  return gamma;
}

Matrix MetricGauge::connection(const Vector& x, const MatrixAlgebra& algebra) const {
  const Factor f = factor(x);
  const int d = dim();
  const Matrix ginv = f.g.inverse();
  const Matrix einv = f.e.inverse();
  Matrix out(algebra.dim(), d);
  for (int j = 0; j < d; ++j) {
    // (Gamma_j)^k_l = Gamma^k_{jl}
    Matrix gamma_j(d, d);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        double acc = 0.0;
        for (int m = 0; m < d; ++m) acc += ginv(k, m) * (f.dg[j](m, l) + f.dg[l](m, j) - f.dg[m](j, l));
        gamma_j(k, l) = 0.5 * acc;
      }
    const Matrix omega = -f.de[j] * einv + f.e * gamma_j * einv;
    Matrix a = Matrix::Zero(d + 1, d + 1);
    a.topLeftCorner(d, d) = omega;
    a.topRightCorner(d, 1) = f.e.col(j);
    out.col(j) = algebra.coords_checked(a, 1e-8);
  }
  return out;
}

// --- GaugeGeometry ----------------------------------------------------------

GaugeGeometry::GaugeGeometry(std::string name, ModelPair model, GroupStructure model_group, ChartDomain domain,
                             ConnectionFn connection)
    : name_(std::move(name)),
      model_(std::move(model)),
      model_group_(std::move(model_group)),
      domain_(std::move(domain)),
      connection_(std::move(connection)) {
  if (domain_.dim() != model_.dim_m())
    throw Error(ErrorKind::InvalidDimension, "chart dimension must equal dim m");
  if (domain_.reference.size() != domain_.dim()) {
    domain_.reference.resize(domain_.dim());
    for (int i = 0; i < domain_.dim(); ++i) domain_.reference[i] = 0.5 * (domain_.box[i].first + domain_.box[i].second);
  }
  if (model_group_.ambient_dim != model_.algebra().ambient_dim())
    throw Error(ErrorKind::InvalidDimension, "model group does not match the model algebra");
}

Matrix GaugeGeometry::connection(const Vector& x) const {
  if (!domain_.contains(x)) throw Error(ErrorKind::OutOfChart, "chart point outside the domain of '" + name_ + "'");
  Matrix a = connection_(x);
  if (a.rows() != model_.dim() || a.cols() != chart_dim())
    throw Error(ErrorKind::InvalidDimension, "gauge returned a connection matrix of the wrong shape");
  if (!a.allFinite()) throw Error(ErrorKind::NumericalFailure, "gauge is not finite at the queried point");
  return a;
}

Matrix GaugeGeometry::coframe(const Vector& x) const {
  const Matrix a = connection(x);
  Matrix theta(model_.dim_m(), chart_dim());
  for (int i = 0; i < model_.dim_m(); ++i) theta.row(i) = a.row(model_.m_indices()[i]);
  const double det = theta.determinant();
  if (!(std::abs(det) > 1e-12 * std::max(1.0, std::pow(max_abs(theta), chart_dim()))))
    throw Error(ErrorKind::DegenerateMetric, "coframe is not invertible at the queried point");
  return theta;
}

GaugeGeometry build_gauge_from_metric(const std::string& name,
                                      const std::vector<std::vector<ExpressionAst>>& metric_entries,
                                      std::pair<int, int> signature, ChartDomain domain, DerivativeMode mode) {
  const int d = static_cast<int>(metric_entries.size());
  if (domain.reference.size() != d) {
    domain.reference.resize(d);
    for (int i = 0; i < d; ++i) domain.reference[i] = 0.5 * (domain.box.at(i).first + domain.box.at(i).second);
  }
  auto metric = std::make_shared<const MetricGauge>(metric_entries, signature, domain, mode);
  ModelPair model = euclidean_type_pair(metric->eta(), "R^" + std::to_string(d) + " x| o(" +
                                                           std::to_string(signature.first) + "," +
                                                           std::to_string(signature.second) + ")");
  const MatrixAlgebra algebra = model.algebra();
  GroupStructure group = GroupStructure::single(d + 1, BlockKind::AffinePseudoOrthogonal, metric->eta());
  GaugeGeometry out(name, std::move(model), std::move(group), std::move(domain),
                    [metric, algebra](const Vector& x) { return metric->connection(x, algebra); });
  out.set_metric(metric);
  return out;
}

GaugeGeometry build_gauge_from_metric(const std::string& name, const std::vector<std::vector<std::string>>& metric_src,
                                      const std::vector<std::string>& variables, std::pair<int, int> signature,
                                      ChartDomain domain, DerivativeMode mode) {
  std::vector<std::vector<ExpressionAst>> entries;
  for (const auto& row : metric_src) {
    std::vector<ExpressionAst> parsed;
    for (const auto& src : row) parsed.push_back(parse_expression(src, variables));
    entries.push_back(std::move(parsed));
  }
  return build_gauge_from_metric(name, entries, signature, std::move(domain), mode);
}

GaugeGeometry gauge_from_mutation(const MutationGeometry& geometry, ChartDomain domain, const std::string& name) {
  const ModelPair& model = geometry.model();
  const int d = model.dim_m();
  Matrix generators(model.dim(), d);
  for (int i = 0; i < d; ++i) generators.col(i) = geometry.to_bundle(model.from_m(Vector::Unit(d, i)));
  const MatrixAlgebra bundle = geometry.bundle_algebra();
  const Matrix sigma = geometry.sigma();
  auto connection = [bundle, sigma, generators](const Vector& x) -> Matrix {
    const AlgebraVector z = generators * x;
    return sigma * phi1(-bundle.ad(z)) * generators;
  };
  GaugeGeometry out(name, model, geometry.layout().model_group, std::move(domain), connection);
  out.set_section([bundle, generators](const Vector& x) { return group_exp(bundle.matrix(generators * x)); });
  return out;
}

// --- Geometry ---------------------------------------------------------------

const std::string& Geometry::name() const {
  return is_mutation() ? mutation()->name() : gauge()->name();
}

const MutationGeometry* Geometry::mutation() const {
  const auto* p = std::get_if<0>(&v_);
  return p ? p->get() : nullptr;
}

const GaugeGeometry* Geometry::gauge() const {
  const auto* p = std::get_if<1>(&v_);
  return p ? p->get() : nullptr;
}

const ModelPair& Geometry::model() const { return is_mutation() ? mutation()->model() : gauge()->model(); }

const GroupStructure& Geometry::model_group() const {
  return is_mutation() ? mutation()->layout().model_group : gauge()->model_group();
}

const GroupStructure& Geometry::point_group() const {
  return is_mutation() ? mutation()->layout().bundle_group : gauge()->model_group();
}

// --- pointwise --------------------------------------------------------------

AlgebraVector connection_at(const Geometry& geometry, const BundlePoint& point, const BundleTangent& tangent) {
  if (const auto* m = geometry.mutation()) {
    const Matrix rel = point.g.inverse() * tangent.dg;
    return m->to_model(m->bundle_algebra().coords_checked(rel));
  }
  const GaugeGeometry& gauge = *geometry.gauge();
  const MatrixAlgebra& g = gauge.model().algebra();
  if (tangent.dx.size() != gauge.chart_dim())
    throw Error(ErrorKind::InvalidDimension, "chart tangent has the wrong dimension");
  const Matrix a = gauge.connection(point.x);
  const Matrix hinv = point.g.inverse();
  return adjoint(hinv, a * tangent.dx, g) + g.coords_checked(hinv * tangent.dg);
}

BundleTangent frame_tangent(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& x) {
  if (const auto* m = geometry.mutation()) return {Vector(), point.g * m->bundle_matrix(x)};
  const GaugeGeometry& gauge = *geometry.gauge();
  const ModelPair& model = gauge.model();
  const MatrixAlgebra& g = model.algebra();
  const Matrix a = gauge.connection(point.x);
  Matrix theta(model.dim_m(), gauge.chart_dim());
  for (int i = 0; i < model.dim_m(); ++i) theta.row(i) = a.row(model.m_indices()[i]);
  const Vector rotated = model.m_part(adjoint(point.g, model.project_m(x), g));
  const Vector xdot = theta.partialPivLu().solve(rotated);
  const Matrix hdot = point.g * g.matrix(model.project_h(x)) - g.matrix(model.project_h(a * xdot)) * point.g;
  return {xdot, hdot};
}

BundlePoint frame_flow(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& x, double t) {
  if (const auto* m = geometry.mutation()) return BundlePoint::group(point.g * group_exp(t * m->bundle_matrix(x)));
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / 1e-2)));
  const double h = t / steps;
  ChartState state{point.x, point.g};
  auto rhs = [&](double, const ChartState& s) {
    const BundleTangent v = frame_tangent(geometry, BundlePoint::chart(s.x, s.h), x);
    return ChartState{v.dx, v.dg};
  };
  for (int i = 0; i < steps; ++i) state = rk4_step(rhs, i * h, state, h);
  return BundlePoint::chart(state.x, state.h);
}

HElement h_element(const Geometry& geometry, const Vector& h_coords) {
  const ModelPair& model = geometry.model();
  const AlgebraVector y = model.from_h(h_coords);
  const Matrix in_model = group_exp(model.algebra().matrix(y));
  if (const auto* m = geometry.mutation()) return {group_exp(m->bundle_matrix(y)), in_model};
  return {in_model, in_model};
}

BundlePoint right_translate(const Geometry&, const BundlePoint& point, const HElement& h) {
  return {point.x, point.g * h.bundle};
}

BundleTangent right_translate(const Geometry&, const BundleTangent& tangent, const HElement& h) {
  return {tangent.dx, tangent.dg * h.bundle};
}

BundlePoint base_point(const Geometry& geometry) {
  if (const auto* m = geometry.mutation())
    return BundlePoint::group(Matrix::Identity(m->bundle_algebra().ambient_dim(), m->bundle_algebra().ambient_dim()));
  const GaugeGeometry& gauge = *geometry.gauge();
  const int n = gauge.model().algebra().ambient_dim();
  return BundlePoint::chart(gauge.domain().reference, Matrix::Identity(n, n));
}

BundlePoint random_point(const Geometry& geometry, Rng& rng, double spread) {
  if (const auto* m = geometry.mutation()) {
    const MatrixAlgebra& p = m->bundle_algebra();
    const Matrix g = group_exp(p.matrix(rng.uniform_vector(p.dim(), -spread, spread)));
    return BundlePoint::group(m->layout().bundle_group.project_fully(g));
  }
  const GaugeGeometry& gauge = *geometry.gauge();
  const auto box = gauge.domain().sample_box();
  Vector x(gauge.chart_dim());
  for (int attempt = 0;; ++attempt) {
    for (int i = 0; i < gauge.chart_dim(); ++i) x[i] = rng.uniform(box[i].first, box[i].second);
    if (gauge.domain().contains(x)) break;
    if (attempt > 1000) throw Error(ErrorKind::DomainError, "could not sample a point inside the chart");
  }
  const ModelPair& model = gauge.model();
  const Matrix h = group_exp(model.algebra().matrix(model.from_h(rng.uniform_vector(model.dim_h(), -spread, spread))));
  return BundlePoint::chart(x, gauge.model_group().project_fully(h));
}

Vector base_coords(const Geometry& geometry, const BundlePoint& point) {
  if (const auto* m = geometry.mutation()) return m->base_coords(point.g);
  return point.x;
}

double point_residual(const Geometry& geometry, const BundlePoint& point) {
  return geometry.point_group().residual(point.g);
}

BundlePoint normalize_point(const Geometry& geometry, BundlePoint point) {
  point.g = geometry.point_group().project_fully(point.g);
  return point;
}

Vector chart_velocity_to_m(const Geometry& geometry, const BundlePoint& point, const Vector& u) {
  const GaugeGeometry* gauge = geometry.gauge();
  if (gauge == nullptr) throw Error(ErrorKind::Unsupported, "chart velocities only exist for gauge models");
  const ModelPair& model = gauge->model();
  const Vector theta_u = gauge->coframe(point.x) * u;
  return model.m_part(adjoint(point.g.inverse(), model.from_m(theta_u), model.algebra()));
}

}  // namespace cartan
