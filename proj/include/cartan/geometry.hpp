#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cartan/expression.hpp"
#include "cartan/lie.hpp"
#include "cartan/random.hpp"

namespace cartan {

/// A point of the bundle. Mutation models use `g` = p in P and leave `x`
/// empty; gauge models use the trivialization (x, h) with h in H realized
/// inside the model group.
struct BundlePoint {
  Vector x;
  Matrix g;

  static BundlePoint group(Matrix p) { return {Vector(), std::move(p)}; }
  static BundlePoint chart(Vector x, Matrix h) { return {std::move(x), std::move(h)}; }
};

/// Tangent vector at a BundlePoint in the same coordinates.
struct BundleTangent {
  Vector dx;
  Matrix dg;
};

/// Layout data that the algebra alone does not determine.
struct MutationLayout {
  GroupStructure bundle_group;
  GroupStructure model_group;
  /// Entries (row, col) of p that form the base-point coordinates.
  std::vector<std::pair<int, int>> base_entries;
};

/// omega = sigma o omega_P for a bundle group P and a linear isomorphism
/// sigma: Lie(P) -> g. sigma = identity on g itself is the Klein geometry.
class MutationGeometry {
 public:
  MutationGeometry(std::string name, MatrixAlgebra bundle_algebra, ModelPair model, Matrix sigma, MutationLayout layout);

  const std::string& name() const { return name_; }
  const MatrixAlgebra& bundle_algebra() const { return bundle_; }
  const ModelPair& model() const { return model_; }
  const Matrix& sigma() const { return sigma_; }
  const Matrix& sigma_inv() const { return sigma_inv_; }
  const MutationLayout& layout() const { return layout_; }

  /// sigma applied to Lie(P) coordinates.
  AlgebraVector to_model(const AlgebraVector& xi) const { return sigma_ * xi; }
  AlgebraVector to_bundle(const AlgebraVector& x) const { return sigma_inv_ * x; }
  /// Matrix of sigma^{-1}(X) in the bundle algebra.
  Matrix bundle_matrix(const AlgebraVector& x) const { return bundle_.matrix(to_bundle(x)); }

  /// True when sigma is the identity and both algebras have the same basis.
  bool is_klein() const;

  Vector base_coords(const Matrix& p) const;

 private:
  std::string name_;
  MatrixAlgebra bundle_;
  ModelPair model_;
  Matrix sigma_;
  Matrix sigma_inv_;
  MutationLayout layout_;
};

/// Chart region of a gauge model: a box, minus closed balls, plus the
/// reference point used as default base point.
struct ChartDomain {
  struct Ball {
    Vector center;
    double radius = 0.0;
  };
  std::vector<std::pair<double, double>> box;
  std::vector<Ball> excluded;
  Vector reference;

  bool contains(const Vector& x) const;
  int dim() const { return static_cast<int>(box.size()); }
  /// Box used for random sampling: the domain box clipped to reference +- 2.
  std::vector<std::pair<double, double>> sample_box() const;
};

enum class DerivativeMode { Analytic, CentralDifference };

/// Levi-Civita data of a pseudo-Riemannian metric given by expressions.
/// The coframe is a signature-orthonormal LDL^T factorization taken in a
/// constant basis fixed by the eigenvectors of the metric at the reference
/// point.
class MetricGauge {
 public:
  MetricGauge(std::vector<std::vector<ExpressionAst>> entries, std::pair<int, int> signature,
              const ChartDomain& domain, DerivativeMode mode);

  int dim() const { return static_cast<int>(entries_.size()); }
  const std::vector<std::vector<ExpressionAst>>& entries() const { return entries_; }
  std::pair<int, int> signature() const { return signature_; }
  const Vector& eta() const { return eta_; }
  DerivativeMode mode() const { return mode_; }

  Matrix metric(const Vector& x) const;
  /// E with g = E^T eta E; rows are the coframe covectors.
  Matrix coframe(const Vector& x) const;
  /// Gamma[k](i, j) = Gamma^k_ij.
  std::vector<Matrix> christoffel(const Vector& x) const;
  /// Columns A_x(e_j) in coordinates of R^d x| o(p,q).
  Matrix connection(const Vector& x, const MatrixAlgebra& algebra) const;

 private:
  struct Factor {
    Matrix g;
    std::vector<Matrix> dg;  // dg[k] = d_k g
    Matrix e;
    std::vector<Matrix> de;  // de[k] = d_k E
  };
  Factor factor(const Vector& x) const;
  std::vector<std::vector<Dual>> metric_duals(const Vector& x) const;

  std::vector<std::vector<ExpressionAst>> entries_;
  std::pair<int, int> signature_;
  Vector eta_;
  Matrix basis_;      // M: constant change of basis
  Matrix basis_inv_;  // M^{-1}
  DerivativeMode mode_;
};

/// Cartan connection on a single chart: A_x(u) in g, linear in u, with the
/// full form Ad_{h^{-1}} A_x(xdot) + h^{-1} hdot on the trivialized bundle.
class GaugeGeometry {
 public:
  using ConnectionFn = std::function<Matrix(const Vector&)>;

  GaugeGeometry(std::string name, ModelPair model, GroupStructure model_group, ChartDomain domain,
                ConnectionFn connection);

  const std::string& name() const { return name_; }
  const ModelPair& model() const { return model_; }
  const GroupStructure& model_group() const { return model_group_; }
  const ChartDomain& domain() const { return domain_; }
  int chart_dim() const { return domain_.dim(); }

  /// dim(g) x d matrix whose columns are A_x(e_j). Throws OutOfChart.
  Matrix connection(const Vector& x) const;
  /// The m-rows of connection(x), checked invertible.
  Matrix coframe(const Vector& x) const;

  const MetricGauge* metric() const { return metric_.get(); }
  const std::function<Matrix(const Vector&)>& section() const { return section_; }

  void set_metric(std::shared_ptr<const MetricGauge> metric) { metric_ = std::move(metric); }
  void set_section(std::function<Matrix(const Vector&)> section) { section_ = std::move(section); }

 private:
  std::string name_;
  ModelPair model_;
  GroupStructure model_group_;
  ChartDomain domain_;
  ConnectionFn connection_;
  std::shared_ptr<const MetricGauge> metric_;
  std::function<Matrix(const Vector&)> section_;
};

class Geometry {
 public:
  Geometry(MutationGeometry m) : v_(std::make_shared<const MutationGeometry>(std::move(m))) {}  // NOLINT
  Geometry(GaugeGeometry g) : v_(std::make_shared<const GaugeGeometry>(std::move(g))) {}        // NOLINT

  const std::string& name() const;
  bool is_mutation() const { return v_.index() == 0; }
  const MutationGeometry* mutation() const;
  const GaugeGeometry* gauge() const;
  const ModelPair& model() const;
  const GroupStructure& model_group() const;
  /// Group structure the bundle point's matrix must satisfy.
  const GroupStructure& point_group() const;

 private:
  std::variant<std::shared_ptr<const MutationGeometry>, std::shared_ptr<const GaugeGeometry>> v_;
};

/// An element of H in both realizations: inside P (or the gauge fiber) and
/// inside the model group G.
struct HElement {
  Matrix bundle;
  Matrix model;
};

// --- construction ---------------------------------------------------------

MutationGeometry build_mutation(const std::string& name, MatrixAlgebra bundle_algebra, ModelPair model,
                                const Matrix& sigma, MutationLayout layout);

GaugeGeometry build_gauge_from_metric(const std::string& name,
                                      const std::vector<std::vector<ExpressionAst>>& metric_entries,
                                      std::pair<int, int> signature, ChartDomain domain,
                                      DerivativeMode mode = DerivativeMode::Analytic);

/// Same, parsing the entries first.
GaugeGeometry build_gauge_from_metric(const std::string& name, const std::vector<std::vector<std::string>>& metric_src,
                                      const std::vector<std::string>& variables, std::pair<int, int> signature,
                                      ChartDomain domain, DerivativeMode mode = DerivativeMode::Analytic);

/// Pulls a mutation model back along the exponential section
/// s(x) = exp(sum_i x_i sigma^{-1}(m_i)); A_x = sigma(s^{-1} ds) in closed form.
GaugeGeometry gauge_from_mutation(const MutationGeometry& geometry, ChartDomain domain, const std::string& name);

// --- pointwise operations -------------------------------------------------

/// omega at `point` applied to `tangent`.
AlgebraVector connection_at(const Geometry& geometry, const BundlePoint& point, const BundleTangent& tangent);

/// omega^{-1}(X) at `point`.
BundleTangent frame_tangent(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& x);

/// Flow of the constant frame field omega^{-1}(X) for time t.
BundlePoint frame_flow(const Geometry& geometry, const BundlePoint& point, const AlgebraVector& x, double t);

HElement h_element(const Geometry& geometry, const Vector& h_coords);

/// p . h using the bundle realization of h.
BundlePoint right_translate(const Geometry& geometry, const BundlePoint& point, const HElement& h);
BundleTangent right_translate(const Geometry& geometry, const BundleTangent& tangent, const HElement& h);

/// Base (identity coset or reference chart point) lift.
BundlePoint base_point(const Geometry& geometry);

BundlePoint random_point(const Geometry& geometry, Rng& rng, double spread = 1.0);

Vector base_coords(const Geometry& geometry, const BundlePoint& point);

/// Violation of the group relations by the point's matrix.
double point_residual(const Geometry& geometry, const BundlePoint& point);

/// Projects the point's matrix onto its group (fully).
BundlePoint normalize_point(const Geometry& geometry, BundlePoint point);

/// Converts a chart velocity at a gauge base point into m-coordinates
/// (theta(u) rotated by h^{-1}).
Vector chart_velocity_to_m(const Geometry& geometry, const BundlePoint& point, const Vector& u);

}  // namespace cartan
