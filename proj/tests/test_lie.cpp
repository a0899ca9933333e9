#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cartan/catalog.hpp"
#include "cartan/error.hpp"
#include "cartan/lie.hpp"
#include "cartan/random.hpp"

using namespace cartan;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

MatrixAlgebra so3() {
  Matrix l1 = Matrix::Zero(3, 3), l2 = Matrix::Zero(3, 3), l3 = Matrix::Zero(3, 3);
  l1(1, 2) = -1; l1(2, 1) = 1;
  l2(0, 2) = 1;  l2(2, 0) = -1;
  l3(0, 1) = -1; l3(1, 0) = 1;
  return MatrixAlgebra("so(3)", {l1, l2, l3});
}

Matrix rotation2(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("so(3) bracket matches the matrix commutator") {
  const MatrixAlgebra g = so3();
  const AlgebraVector e1 = Vector::Unit(3, 0), e2 = Vector::Unit(3, 1);
  const AlgebraVector via_constants = bracket(g, e1, e2);
  const AlgebraVector via_matrices = g.coords(commutator(g.matrix(e1), g.matrix(e2)));
  CHECK((via_constants - Vector::Unit(3, 2)).norm() < 1e-12);
  CHECK((via_constants - via_matrices).norm() < 1e-12);
}

TEST_CASE("bracket of a vector with itself vanishes") {
  const Geometry hyp = catalog("hyperbolic:3");
  Rng rng(3);
  for (const MatrixAlgebra* g : {&hyp.model().algebra(), &hyp.mutation()->bundle_algebra()}) {
    const AlgebraVector x = rng.uniform_vector(g->dim(), -1, 1);
    CHECK(bracket(*g, x, x).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("semidirect bracket in i(2)") {
  const ModelPair pair = euclidean_type_pair(Vector::Ones(2), "i(2)");
  const MatrixAlgebra& g = pair.algebra();
  // J rotates e1 to e2 inside the linear block.
  Matrix j = Matrix::Zero(3, 3);
  j(0, 1) = -1;
  j(1, 0) = 1;
  const AlgebraVector jc = g.coords_checked(j);
  const AlgebraVector t1 = pair.from_m(Vector::Unit(2, 0));
  const AlgebraVector expected = pair.from_m(Vector::Unit(2, 1));
  CHECK((bracket(g, jc, t1) - expected).norm() < 1e-12);
  CHECK((g.coords(commutator(j, g.matrix(t1))) - expected).norm() < 1e-12);
}

TEST_CASE("structure constants agree with commutators on random pairs") {
  for (const std::string name : {"hyperbolic:3", "affine:2", "sl2xh"}) {
    const Geometry geo = catalog(name);
    const MatrixAlgebra& g = geo.model().algebra();
    CHECK(g.jacobi_residual() <= 1e-10);
    Rng rng(42);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      const AlgebraVector x = rng.uniform_vector(g.dim(), -1, 1), y = rng.uniform_vector(g.dim(), -1, 1);
      const Matrix direct = commutator(g.matrix(x), g.matrix(y));
      worst = std::max(worst, max_abs(g.matrix(bracket(g, x, y)) - direct));
    }
    CHECK(worst <= 1e-9);
    for (int i = 0; i < g.dim(); ++i)
      for (int j = 0; j < g.dim(); ++j)
        for (int k = 0; k < g.dim(); ++k)
          CHECK(g.structure_constant(i, j, k) == doctest::Approx(-g.structure_constant(j, i, k)));
  }
}

TEST_CASE("bracket rejects mismatched dimensions") {
  const MatrixAlgebra g = so3();
  CHECK(kind_of([&] { bracket(g, Vector::Zero(2), Vector::Zero(3)); }) == ErrorKind::InvalidDimension);
}

TEST_CASE("algebra construction rejects dependent or non-closed bases") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1;
  CHECK(kind_of([&] { MatrixAlgebra("dup", {a, 2.0 * a}); }) == ErrorKind::InvalidArgument);
  Matrix b = Matrix::Zero(2, 2);
  b(1, 0) = 1;
  CHECK(kind_of([&] { MatrixAlgebra("open", {a, b}); }) == ErrorKind::NotInAlgebra);
}

TEST_CASE("group_exp closed forms") {
  CHECK(max_abs(group_exp(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)) == 0.0);

  Matrix j(2, 2);
  j << 0, -1, 1, 0;
  CHECK(max_abs(group_exp(std::numbers::pi * j) + Matrix::Identity(2, 2)) < 1e-15 * 10);

  Matrix n = Matrix::Zero(2, 2);
  n(0, 1) = 1;
  CHECK(max_abs(group_exp(n) - (Matrix::Identity(2, 2) + n)) < 1e-15);
}

TEST_CASE("group_exp relative accuracy up to norm 50") {
  // Rodrigues for so(3) and the spectral formula for symmetric matrices.
  const MatrixAlgebra g = so3();
  Rng rng(5);
  for (double norm : {0.5, 5.0, 50.0}) {
    const Vector axis = rng.unit_vector(3);
    const Matrix k = g.matrix(axis);
    const Matrix expected = Matrix::Identity(3, 3) + std::sin(norm) * k + (1 - std::cos(norm)) * k * k;
    CHECK(max_abs(group_exp(norm * k) - expected) <= 1e-12 * 10);

    Matrix s = Matrix::Random(4, 4);
    s = (s + s.transpose()).eval();
    s *= norm / s.norm();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Matrix spectral = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                            es.eigenvectors().transpose();
    CHECK(max_abs(group_exp(s) - spectral) / max_abs(spectral) <= 1e-12);
  }
}

TEST_CASE("group_exp of commuting pairs") {
  const ModelPair pair = euclidean_type_pair(Vector::Ones(3), "i(3)");
  const Matrix x = pair.algebra().matrix(pair.from_m(Vector::Unit(3, 0) * 0.7));
  const Matrix y = pair.algebra().matrix(pair.from_m(Vector::Unit(3, 2) * -1.3));
  CHECK(max_abs(group_exp(x) * group_exp(y) - group_exp(x + y)) <= 1e-11);
  Matrix d1 = Matrix::Zero(3, 3), d2 = Matrix::Zero(3, 3);
  d1.diagonal() << 0.3, -1.2, 2.0;
  d2.diagonal() << 1.1, 0.4, -0.5;
  CHECK(max_abs(group_exp(d1) * group_exp(d2) - group_exp(d1 + d2)) / max_abs(group_exp(d1 + d2)) <= 1e-11);
}

TEST_CASE("group_exp rejects non-finite input") {
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK(kind_of([&] { group_exp(bad); }) == ErrorKind::NumericalFailure);
}

TEST_CASE("group_log examples") {
  CHECK(max_abs(group_log(Matrix::Identity(3, 3))) < 1e-15);
  Matrix j(2, 2);
  j << 0, -1, 1, 0;
  CHECK(max_abs(group_log(rotation2(std::numbers::pi / 2)) - std::numbers::pi / 2 * j) < 1e-12);
  CHECK(kind_of([] { group_log(-Matrix::Identity(2, 2)); }) == ErrorKind::PrincipalLogUndefined);
  Matrix jordan(2, 2);
  jordan << -1, 1, 0, -1;
  CHECK(kind_of([&] { group_log(jordan); }) == ErrorKind::PrincipalLogUndefined);
}

TEST_CASE("group_log inverts group_exp on small m-vectors of the catalog models") {
  Rng rng(9);
  for (const std::string& name : mutation_catalog_names()) {
    const Geometry geo = catalog(name);
    const ModelPair& pair = geo.model();
    for (int s = 0; s < 20; ++s) {
      const Vector m = rng.unit_vector(pair.dim_m()) * rng.uniform(0.0, 1.0);
      const Matrix x = pair.algebra().matrix(pair.from_m(m));
      CHECK(max_abs(group_log(group_exp(x)) - x) <= 1e-9);
    }
  }
}

TEST_CASE("adjoint examples") {
  const ModelPair pair = euclidean_type_pair(Vector::Ones(2), "i(2)");
  const MatrixAlgebra& g = pair.algebra();
  Rng rng(1);
  const AlgebraVector x = rng.uniform_vector(g.dim(), -1, 1);
  CHECK((adjoint(Matrix::Identity(3, 3), x, g) - x).norm() < 1e-15);

  Matrix rot = Matrix::Identity(3, 3);
  rot.topLeftCorner(2, 2) = rotation2(std::numbers::pi / 2);
  const AlgebraVector t1 = pair.from_m(Vector::Unit(2, 0));
  // Oracle: conjugation moves the translation column by the rotation.
  const Matrix conj = rot * g.matrix(t1) * rot.inverse();
  CHECK(std::abs(conj(1, 2) - 1.0) < 1e-15);
  CHECK((adjoint(rot, t1, g) - pair.from_m(Vector::Unit(2, 1))).norm() < 1e-12);

  const Geometry hyp = catalog("hyperbolic:3");
  const ModelPair& hp = hyp.model();
  for (const Matrix& h : hp.h_samples()) {
    const AlgebraVector y = adjoint(h, hp.from_m(rng.uniform_vector(3, -1, 1)), hp.algebra());
    CHECK(hp.h_part(y).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("adjoint is a homomorphism") {
  const Geometry geo = catalog("hyperbolic-klein:3");
  const MatrixAlgebra& g = geo.model().algebra();
  Rng rng(17);
  for (int s = 0; s < 20; ++s) {
    const Matrix g1 = group_exp(g.matrix(rng.uniform_vector(g.dim(), -1, 1)));
    const Matrix g2 = group_exp(g.matrix(rng.uniform_vector(g.dim(), -1, 1)));
    const AlgebraVector x = rng.uniform_vector(g.dim(), -1, 1);
    CHECK((adjoint(g1 * g2, x, g) - adjoint(g1, adjoint(g2, x, g), g)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("adjoint by a matrix outside the group leaves the algebra") {
  const MatrixAlgebra g = so3();
  Matrix shear = Matrix::Identity(3, 3);
  shear(0, 1) = 2.0;
  CHECK(kind_of([&] { adjoint(shear, Vector::Unit(3, 0), g); }) == ErrorKind::NotInAlgebra);
}

TEST_CASE("validate_reductive") {
  const ModelPair hyperbolic = catalog("hyperbolic:2").model();
  CHECK(validate_reductive(hyperbolic).passed());

  // Move the first translation into h: [J, T1] = T2 leaves h.
  std::vector<int> h = hyperbolic.h_indices();
  std::vector<int> m = hyperbolic.m_indices();
  h.push_back(m.front());
  m.erase(m.begin());
  const ValidationReport broken = validate_reductive(ModelPair(hyperbolic.algebra(), h, m));
  CHECK_FALSE(broken.passed());
  CHECK_FALSE(broken.find("h_subalgebra")->passed);

  const ValidationReport overlap = validate_reductive(ModelPair(hyperbolic.algebra(), {2, 0}, {0, 1}));
  CHECK_FALSE(overlap.find("direct_sum")->passed);

  CHECK(validate_reductive(catalog("sl2xh").model()).passed());
  CHECK(validate_reductive(catalog("affine:2").model()).passed());
}

TEST_CASE("group structures project drifted points back") {
  const Geometry geo = catalog("hyperbolic:2");
  const GroupStructure& group = geo.mutation()->layout().bundle_group;
  Rng rng(2);
  const Matrix p = group_exp(geo.mutation()->bundle_algebra().matrix(rng.uniform_vector(3, -1, 1)));
  CHECK(group.residual(p) < 1e-12);
  const Matrix drifted = p + 1e-4 * Matrix::Random(3, 3);
  CHECK(group.residual(drifted) > 1e-6);
  CHECK(group.residual(group.project(drifted, 1)) < 1e-7);
  CHECK(group.residual(group.project_fully(drifted)) < 1e-13);

  const Geometry sl2 = catalog("sl2xh");
  const GroupStructure& blocks = sl2.mutation()->layout().bundle_group;
  Matrix q = Matrix::Identity(4, 4);
  q(0, 0) = 1.01;
  q(2, 3) = 0.01;
  CHECK(blocks.residual(blocks.project_fully(q)) < 1e-13);
}
