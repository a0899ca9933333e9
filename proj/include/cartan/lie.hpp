#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cartan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Coordinates of a Lie algebra element over a fixed basis. Coordinates are
/// authoritative; matrices are derived with MatrixAlgebra::matrix.
using AlgebraVector = Eigen::VectorXd;

namespace tol {
inline constexpr double structural = 1e-10;
inline constexpr double round_trip = 1e-9;
}  // namespace tol

/// A real matrix Lie algebra given by an ordered basis of square matrices.
/// Construction checks independence, closure and the Jacobi identity and
/// tabulates the structure constants c[i][j][k] with [b_i, b_j] = sum_k c b_k.
class MatrixAlgebra {
 public:
  MatrixAlgebra(std::string name, std::vector<Matrix> basis);

  const std::string& name() const { return name_; }
  int ambient_dim() const { return ambient_dim_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<Matrix>& basis() const { return basis_; }

  double structure_constant(int i, int j, int k) const {
    return constants_[(static_cast<std::size_t>(i) * dim() + j) * dim() + k];
  }

  Matrix matrix(const AlgebraVector& coords) const;

  /// Least-squares coordinates of `m`. `residual` receives the max-norm of
  /// the part of `m` outside the span.
  AlgebraVector coords(const Matrix& m, double* residual = nullptr) const;

  /// Like coords but throws NotInAlgebra when the residual exceeds
  /// `tolerance * max(1, |m|_max)`.
  AlgebraVector coords_checked(const Matrix& m, double tolerance = tol::round_trip) const;

  /// Matrix of ad_x acting on coordinates.
  Matrix ad(const AlgebraVector& x) const;

  /// Largest Jacobi-identity residual over all basis triples.
  double jacobi_residual() const;

  void check_dim(const AlgebraVector& x) const;

 private:
  std::string name_;
  int ambient_dim_;
  std::vector<Matrix> basis_;
  Matrix flat_basis_;  // ambient^2 x dim
  Matrix pinv_;        // dim x ambient^2
  std::vector<double> constants_;
};

Matrix commutator(const Matrix& a, const Matrix& b);

AlgebraVector bracket(const MatrixAlgebra& algebra, const AlgebraVector& x, const AlgebraVector& y);

/// Matrix exponential (scaling and squaring around a Pade core).
Matrix group_exp(const Matrix& x);

/// Principal matrix logarithm. Throws PrincipalLogUndefined when an
/// eigenvalue lies on the closed negative real axis.
Matrix group_log(const Matrix& g);

/// phi1(M) = sum_k M^k / (k+1)!, i.e. (e^M - I) M^{-1} when M is invertible.
Matrix phi1(const Matrix& m);

/// Coordinates of g X g^{-1}.
AlgebraVector adjoint(const Matrix& g, const AlgebraVector& x, const MatrixAlgebra& algebra);

/// Matrix of Ad_g acting on coordinates.
Matrix adjoint_matrix(const Matrix& g, const MatrixAlgebra& algebra);

/// Describes the defining relations of a block-diagonal matrix group so that
/// points can be projected back onto it after numerical drift.
enum class BlockKind {
  General,                 // GL block, no relation
  Special,                 // det = 1
  PseudoOrthogonal,        // A^T eta A = eta
  AffineGeneral,           // [[A, b], [0, 1]]
  AffinePseudoOrthogonal,  // [[A, b], [0, 1]] with A^T eta A = eta
};

struct GroupBlock {
  int offset = 0;
  int size = 0;
  BlockKind kind = BlockKind::General;
  Vector eta;  // signature for pseudo-orthogonal kinds
};

struct GroupStructure {
  int ambient_dim = 0;
  std::vector<GroupBlock> blocks;

  static GroupStructure general(int n);
  static GroupStructure single(int n, BlockKind kind, Vector eta = {});

  /// Constraint violation in max-norm (including entries outside the blocks).
  double residual(const Matrix& g) const;

  /// Applies `newton_steps` Newton-Schulz style corrections per block.
  Matrix project(const Matrix& g, int newton_steps = 1) const;

  /// Projects until the residual is below 1e-14 (at most 60 steps).
  Matrix project_fully(const Matrix& g) const;
};

/// A reductive pair g = m (+) h over a fixed basis of g.
class ModelPair {
 public:
  ModelPair(MatrixAlgebra g, std::vector<int> h_indices, std::vector<int> m_indices,
            std::vector<Matrix> h_generators = {});

  const MatrixAlgebra& algebra() const { return g_; }
  const std::vector<int>& h_indices() const { return h_indices_; }
  const std::vector<int>& m_indices() const { return m_indices_; }
  const std::vector<Matrix>& h_generators() const { return h_generators_; }
  int dim() const { return g_.dim(); }
  int dim_m() const { return static_cast<int>(m_indices_.size()); }
  int dim_h() const { return static_cast<int>(h_indices_.size()); }

  Vector m_part(const AlgebraVector& x) const;
  Vector h_part(const AlgebraVector& x) const;
  AlgebraVector from_m(const Vector& m) const;
  AlgebraVector from_h(const Vector& h) const;
  AlgebraVector assemble(const Vector& m, const Vector& h) const;
  AlgebraVector project_m(const AlgebraVector& x) const { return from_m(m_part(x)); }
  AlgebraVector project_h(const AlgebraVector& x) const { return from_h(h_part(x)); }

  /// Sampled elements of H: exp(t b) for each h-basis vector b and
  /// t in {+-0.1, +-1}, then `n_random` seeded random exp(h) elements,
  /// then the user generators.
  std::vector<Matrix> h_samples(std::uint64_t seed = 1, int n_random = 20) const;

 private:
  MatrixAlgebra g_;
  std::vector<int> h_indices_;
  std::vector<int> m_indices_;
  std::vector<Matrix> h_generators_;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool passed() const;
  const ValidationCheck* find(const std::string& name) const;
};

ValidationReport validate_reductive(const ModelPair& pair);

// Builders for the algebras used by the catalog.

/// Affine realization of R^d x| o(eta) as (d+1)x(d+1) matrices [[X, v], [0, 0]].
/// Basis: translations T_1..T_d, then L_ab = eta (E_ba - E_ab) for a < b.
/// m = translations, h = rotations.
ModelPair euclidean_type_pair(const Vector& eta, const std::string& name);

/// o(eta) embedded in a larger ambient matrix starting at `offset`.
std::vector<Matrix> pseudo_orthogonal_basis(const Vector& eta, int ambient, int offset);

}  // namespace cartan
