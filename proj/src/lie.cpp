#include "cartan/lie.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "cartan/error.hpp"
#include "cartan/random.hpp"

namespace cartan {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

MatrixAlgebra::MatrixAlgebra(std::string name, std::vector<Matrix> basis)
    : name_(std::move(name)), basis_(std::move(basis)) {
  if (basis_.empty()) throw Error(ErrorKind::InvalidDimension, "algebra '" + name_ + "' has an empty basis");
  ambient_dim_ = static_cast<int>(basis_.front().rows());
  const int n2 = ambient_dim_ * ambient_dim_;
  flat_basis_.resize(n2, dim());
  for (int i = 0; i < dim(); ++i) {
    const Matrix& b = basis_[i];
    if (b.rows() != ambient_dim_ || b.cols() != ambient_dim_)
      throw Error(ErrorKind::InvalidDimension, "basis matrix " + std::to_string(i) + " of '" + name_ + "' has the wrong shape");
    flat_basis_.col(i) = Eigen::Map<const Vector>(b.data(), n2);
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(flat_basis_);
  cod.setThreshold(1e-12);
  if (cod.rank() != dim())
    throw Error(ErrorKind::InvalidArgument, "basis of '" + name_ + "' is linearly dependent");
  pinv_ = cod.pseudoInverse();

  constants_.assign(static_cast<std::size_t>(dim()) * dim() * dim(), 0.0);
  for (int i = 0; i < dim(); ++i) {
    for (int j = 0; j < dim(); ++j) {
      const Matrix c = commutator(basis_[i], basis_[j]);
      double residual = 0.0;
      const AlgebraVector k = coords(c, &residual);
      if (residual > tol::structural * std::max(1.0, max_abs(c)))
        throw Error(ErrorKind::NotInAlgebra, "basis of '" + name_ + "' is not closed under the commutator");
      for (int l = 0; l < dim(); ++l)
        constants_[(static_cast<std::size_t>(i) * dim() + j) * dim() + l] = k[l];
    }
  }
  if (jacobi_residual() > tol::structural)
    throw Error(ErrorKind::NumericalFailure, "Jacobi identity fails for '" + name_ + "'");
}

Matrix MatrixAlgebra::matrix(const AlgebraVector& x) const {
  check_dim(x);
  Matrix m = Matrix::Zero(ambient_dim_, ambient_dim_);
  for (int i = 0; i < dim(); ++i)
    if (x[i] != 0.0) m += x[i] * basis_[i];
  return m;
}

AlgebraVector MatrixAlgebra::coords(const Matrix& m, double* residual) const {
  if (m.rows() != ambient_dim_ || m.cols() != ambient_dim_)
    throw Error(ErrorKind::InvalidDimension, "matrix shape does not match algebra '" + name_ + "'");
  const Eigen::Map<const Vector> flat(m.data(), m.size());
  AlgebraVector x = pinv_ * flat;
  if (residual != nullptr) *residual = (flat_basis_ * x - flat).cwiseAbs().maxCoeff();
  return x;
}

AlgebraVector MatrixAlgebra::coords_checked(const Matrix& m, double tolerance) const {
  double residual = 0.0;
  AlgebraVector x = coords(m, &residual);
  if (!(residual <= tolerance * std::max(1.0, max_abs(m))))
    throw Error(ErrorKind::NotInAlgebra,
                "matrix lies outside '" + name_ + "' (residual " + std::to_string(residual) + ")");
  return x;
}

Matrix MatrixAlgebra::ad(const AlgebraVector& x) const {
  check_dim(x);
  const int n = dim();
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) a(k, j) += x[i] * structure_constant(i, j, k);
  }
  return a;
}

double MatrixAlgebra::jacobi_residual() const {
  const int n = dim();
  double worst = 0.0;
  auto basis_bracket = [&](int i, int j) {
    AlgebraVector v(n);
    for (int k = 0; k < n; ++k) v[k] = structure_constant(i, j, k);
    return v;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const AlgebraVector ij = basis_bracket(i, j);
        const AlgebraVector jk = basis_bracket(j, k);
        const AlgebraVector ki = basis_bracket(k, i);
        AlgebraVector total = AlgebraVector::Zero(n);
        for (int l = 0; l < n; ++l) {
          total += ij[l] * basis_bracket(l, k);
          total += jk[l] * basis_bracket(l, i);
          total += ki[l] * basis_bracket(l, j);
        }
        worst = std::max(worst, total.cwiseAbs().maxCoeff());
      }
  return worst;
}

void MatrixAlgebra::check_dim(const AlgebraVector& x) const {
  if (x.size() != dim())
    throw Error(ErrorKind::InvalidDimension, "vector of length " + std::to_string(x.size()) + " used with '" +
                                                 name_ + "' of dimension " + std::to_string(dim()));
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

AlgebraVector bracket(const MatrixAlgebra& algebra, const AlgebraVector& x, const AlgebraVector& y) {
  algebra.check_dim(x);
  algebra.check_dim(y);
  const int n = algebra.dim();
  AlgebraVector out = AlgebraVector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (y[j] == 0.0) continue;
      const double w = x[i] * y[j];
      for (int k = 0; k < n; ++k) out[k] += w * algebra.structure_constant(i, j, k);
    }
  }
  return out;
}

Matrix group_exp(const Matrix& x) {
  if (x.rows() != x.cols()) throw Error(ErrorKind::InvalidDimension, "group_exp needs a square matrix");
  if (!all_finite(x)) throw Error(ErrorKind::NumericalFailure, "group_exp of a non-finite matrix");
  Matrix out = x.exp();
  if (!all_finite(out)) throw Error(ErrorKind::NumericalFailure, "group_exp overflowed");
  return out;
}

Matrix group_log(const Matrix& g) {
  if (g.rows() != g.cols()) throw Error(ErrorKind::InvalidDimension, "group_log needs a square matrix");
  if (!all_finite(g)) throw Error(ErrorKind::NumericalFailure, "group_log of a non-finite matrix");
  const Eigen::EigenSolver<Matrix> es(g, false);
  const double scale = std::max(1.0, max_abs(g));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> lambda = es.eigenvalues()[i];
    if (std::abs(lambda) <= 1e-13 * scale)
      throw Error(ErrorKind::NumericalFailure, "group_log of a singular matrix");
    // Defective eigenvalues are perturbed by about sqrt(eps) by the solver.
    if (lambda.real() <= 0.0 && std::abs(lambda.imag()) <= 1e-6 * std::max(1.0, std::abs(lambda)))
      throw Error(ErrorKind::PrincipalLogUndefined, "eigenvalue on the closed negative real axis");
  }
  Matrix out = g.log();
  if (!all_finite(out)) throw Error(ErrorKind::NumericalFailure, "group_log produced non-finite entries");
  if (max_abs(out.exp() - g) > tol::round_trip * scale)
    throw Error(ErrorKind::NumericalFailure, "group_log failed its round-trip check");
  return out;
}

Matrix phi1(const Matrix& m) {
  const Eigen::Index n = m.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = m;
  aug.topRightCorner(n, n) = Matrix::Identity(n, n);
  return group_exp(aug).topRightCorner(n, n);
}

AlgebraVector adjoint(const Matrix& g, const AlgebraVector& x, const MatrixAlgebra& algebra) {
  algebra.check_dim(x);
  if (g.rows() != algebra.ambient_dim() || g.cols() != algebra.ambient_dim())
    throw Error(ErrorKind::InvalidDimension, "group element shape does not match the algebra");
  const Matrix conj = g * algebra.matrix(x) * g.inverse();
  return algebra.coords_checked(conj);
}

Matrix adjoint_matrix(const Matrix& g, const MatrixAlgebra& algebra) {
  const Matrix ginv = g.inverse();
  Matrix out(algebra.dim(), algebra.dim());
  for (int j = 0; j < algebra.dim(); ++j)
    out.col(j) = algebra.coords_checked(g * algebra.basis()[j] * ginv);
  return out;
}

// --- GroupStructure ---------------------------------------------------------

GroupStructure GroupStructure::general(int n) { return single(n, BlockKind::General); }

GroupStructure GroupStructure::single(int n, BlockKind kind, Vector eta) {
  GroupStructure s;
  s.ambient_dim = n;
  s.blocks.push_back(GroupBlock{0, n, kind, std::move(eta)});
  return s;
}

namespace {

Matrix eta_matrix(const Vector& eta, Eigen::Index n) {
  if (eta.size() == 0) return Matrix::Identity(n, n);
  return eta.asDiagonal();
}

double block_residual(const GroupBlock& b, const Matrix& a) {
  switch (b.kind) {
    case BlockKind::General:
      return 0.0;
    case BlockKind::Special:
      return std::abs(a.determinant() - 1.0);
    case BlockKind::PseudoOrthogonal: {
      const Matrix eta = eta_matrix(b.eta, a.rows());
      return max_abs(a.transpose() * eta * a - eta);
    }
    case BlockKind::AffineGeneral:
    case BlockKind::AffinePseudoOrthogonal: {
      const Eigen::Index k = a.rows() - 1;
      Vector last = Vector::Zero(k + 1);
      last[k] = 1.0;
      double r = (a.row(k).transpose() - last).cwiseAbs().maxCoeff();
      if (b.kind == BlockKind::AffinePseudoOrthogonal && k > 0) {
        const Matrix lin = a.topLeftCorner(k, k);
        const Matrix eta = eta_matrix(b.eta, k);
        r = std::max(r, max_abs(lin.transpose() * eta * lin - eta));
      }
      return r;
    }
  }
  return 0.0;
}

Matrix newton_orthogonal(const Matrix& a, const Vector& eta_diag) {
  const Matrix eta = eta_matrix(eta_diag, a.rows());
  const Matrix s = eta * a.transpose() * eta * a;
  return a * (3.0 * Matrix::Identity(a.rows(), a.cols()) - s) * 0.5;
}

Matrix project_block(const GroupBlock& b, Matrix a) {
  switch (b.kind) {
    case BlockKind::General:
      return a;
    case BlockKind::Special: {
      const double det = a.determinant();
      if (det > 0.0) a /= std::pow(det, 1.0 / static_cast<double>(a.rows()));
      return a;
    }
    case BlockKind::PseudoOrthogonal:
      return newton_orthogonal(a, b.eta);
    case BlockKind::AffineGeneral:
    case BlockKind::AffinePseudoOrthogonal: {
      const Eigen::Index k = a.rows() - 1;
      a.row(k).setZero();
      a(k, k) = 1.0;
      if (b.kind == BlockKind::AffinePseudoOrthogonal && k > 0)
        a.topLeftCorner(k, k) = newton_orthogonal(a.topLeftCorner(k, k), b.eta);
      return a;
    }
  }
  return a;
}

}  // namespace

double GroupStructure::residual(const Matrix& g) const {
  if (g.rows() != ambient_dim || g.cols() != ambient_dim)
    throw Error(ErrorKind::InvalidDimension, "group element has the wrong shape");
  double r = 0.0;
  Matrix outside = g;
  for (const GroupBlock& b : blocks) {
    r = std::max(r, block_residual(b, g.block(b.offset, b.offset, b.size, b.size)));
    outside.block(b.offset, b.offset, b.size, b.size).setZero();
  }
  return std::max(r, max_abs(outside));
}

Matrix GroupStructure::project(const Matrix& g, int newton_steps) const {
  if (g.rows() != ambient_dim || g.cols() != ambient_dim)
    throw Error(ErrorKind::InvalidDimension, "group element has the wrong shape");
  Matrix out = Matrix::Zero(ambient_dim, ambient_dim);
  for (const GroupBlock& b : blocks) {
    Matrix a = g.block(b.offset, b.offset, b.size, b.size);
    for (int s = 0; s < newton_steps; ++s) a = project_block(b, std::move(a));
    out.block(b.offset, b.offset, b.size, b.size) = a;
  }
  return out;
}

Matrix GroupStructure::project_fully(const Matrix& g) const {
  Matrix out = project(g, 1);
  for (int s = 0; s < 60 && residual(out) > 1e-14; ++s) out = project(out, 1);
  return out;
}

// --- ModelPair ------------------------------------------------------------

ModelPair::ModelPair(MatrixAlgebra g, std::vector<int> h_indices, std::vector<int> m_indices,
                     std::vector<Matrix> h_generators)
    : g_(std::move(g)),
      h_indices_(std::move(h_indices)),
      m_indices_(std::move(m_indices)),
      h_generators_(std::move(h_generators)) {
  for (int i : h_indices_)
    if (i < 0 || i >= g_.dim()) throw Error(ErrorKind::InvalidDimension, "h index out of range");
  for (int i : m_indices_)
    if (i < 0 || i >= g_.dim()) throw Error(ErrorKind::InvalidDimension, "m index out of range");
}

Vector ModelPair::m_part(const AlgebraVector& x) const {
  g_.check_dim(x);
  Vector out(dim_m());
  for (int i = 0; i < dim_m(); ++i) out[i] = x[m_indices_[i]];
  return out;
}

Vector ModelPair::h_part(const AlgebraVector& x) const {
  g_.check_dim(x);
  Vector out(dim_h());
  for (int i = 0; i < dim_h(); ++i) out[i] = x[h_indices_[i]];
  return out;
}

AlgebraVector ModelPair::from_m(const Vector& m) const {
  if (m.size() != dim_m()) throw Error(ErrorKind::InvalidDimension, "m-vector has the wrong length");
  AlgebraVector out = AlgebraVector::Zero(dim());
  for (int i = 0; i < dim_m(); ++i) out[m_indices_[i]] = m[i];
  return out;
}

AlgebraVector ModelPair::from_h(const Vector& h) const {
  if (h.size() != dim_h()) throw Error(ErrorKind::InvalidDimension, "h-vector has the wrong length");
  AlgebraVector out = AlgebraVector::Zero(dim());
  for (int i = 0; i < dim_h(); ++i) out[h_indices_[i]] = h[i];
  return out;
}

AlgebraVector ModelPair::assemble(const Vector& m, const Vector& h) const { return from_m(m) + from_h(h); }

std::vector<Matrix> ModelPair::h_samples(std::uint64_t seed, int n_random) const {
  std::vector<Matrix> out;
  for (int idx : h_indices_)
    for (double t : {0.1, -0.1, 1.0, -1.0}) out.push_back(group_exp(t * g_.basis()[idx]));
  if (dim_h() > 0) {
    Rng rng(seed);
    for (int s = 0; s < n_random; ++s) out.push_back(group_exp(g_.matrix(from_h(rng.uniform_vector(dim_h(), -1.0, 1.0)))));
  }
  out.insert(out.end(), h_generators_.begin(), h_generators_.end());
  return out;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate_reductive(const ModelPair& pair) {
  ValidationReport report;
  const MatrixAlgebra& g = pair.algebra();

  {
    std::set<int> seen;
    bool ok = true;
    for (int i : pair.h_indices()) ok = seen.insert(i).second && ok;
    for (int i : pair.m_indices()) ok = seen.insert(i).second && ok;
    ok = ok && static_cast<int>(seen.size()) == g.dim();
    report.checks.push_back({"direct_sum", ok, ok ? 0.0 : 1.0, 0.0});
  }

  {
    double worst = 0.0;
    for (int i : pair.h_indices())
      for (int j : pair.h_indices()) {
        AlgebraVector bi = AlgebraVector::Zero(g.dim()), bj = AlgebraVector::Zero(g.dim());
        bi[i] = 1.0;
        bj[j] = 1.0;
        const AlgebraVector c = bracket(g, bi, bj);
        for (int k = 0; k < g.dim(); ++k)
          if (std::find(pair.h_indices().begin(), pair.h_indices().end(), k) == pair.h_indices().end())
            worst = std::max(worst, std::abs(c[k]));
      }
    report.checks.push_back({"h_subalgebra", worst <= tol::structural, worst, tol::structural});
  }

  {
    double worst = 0.0;
    bool in_algebra = true;
    for (const Matrix& h : pair.h_samples()) {
      const Matrix hinv = h.inverse();
      for (int idx : pair.m_indices()) {
        double residual = 0.0;
        const Matrix conj = h * g.basis()[idx] * hinv;
        const AlgebraVector c = g.coords(conj, &residual);
        if (residual > tol::round_trip * std::max(1.0, conj.cwiseAbs().maxCoeff())) in_algebra = false;
        for (int k = 0; k < g.dim(); ++k)
          if (std::find(pair.m_indices().begin(), pair.m_indices().end(), k) == pair.m_indices().end())
            worst = std::max(worst, std::abs(c[k]));
      }
    }
    const double tolerance = tol::round_trip;
    report.checks.push_back({"ad_invariance", in_algebra && worst <= tolerance, in_algebra ? worst : 1.0, tolerance});
  }
  return report;
}

// --- builders -------------------------------------------------------------

std::vector<Matrix> pseudo_orthogonal_basis(const Vector& eta, int ambient, int offset) {
  const int d = static_cast<int>(eta.size());
  std::vector<Matrix> out;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      Matrix m = Matrix::Zero(ambient, ambient);
      // eta (E_ba - E_ab): rotates e_a towards e_b in the Riemannian case.
      m(offset + b, offset + a) = eta[b];
      m(offset + a, offset + b) = -eta[a];
      out.push_back(std::move(m));
    }
  return out;
}

ModelPair euclidean_type_pair(const Vector& eta, const std::string& name) {
  const int d = static_cast<int>(eta.size());
  std::vector<Matrix> basis;
  std::vector<int> m_idx, h_idx;
  for (int i = 0; i < d; ++i) {
    Matrix t = Matrix::Zero(d + 1, d + 1);
    t(i, d) = 1.0;
    basis.push_back(std::move(t));
    m_idx.push_back(i);
  }
  for (Matrix& r : pseudo_orthogonal_basis(eta, d + 1, 0)) {
    h_idx.push_back(static_cast<int>(basis.size()));
    basis.push_back(std::move(r));
  }
  std::vector<Matrix> generators;
  if (d >= 1) {
    // A reflection reaches the non-identity component of O(p, q).
    Matrix reflect = Matrix::Identity(d + 1, d + 1);
    reflect(0, 0) = -1.0;
    generators.push_back(std::move(reflect));
  }
  return ModelPair(MatrixAlgebra(name, std::move(basis)), std::move(h_idx), std::move(m_idx), std::move(generators));
}

}  // namespace cartan
