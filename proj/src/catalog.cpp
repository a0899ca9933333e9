#include "cartan/catalog.hpp"

#include <charconv>
#include <numbers>

#include "cartan/error.hpp"

namespace cartan {

namespace {

int parse_dimension(const std::string& name, const std::string& prefix) {
  const std::string tail = name.substr(prefix.size());
  int n = 0;
  const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), n);
  if (ec != std::errc() || ptr != tail.data() + tail.size() || n < 1 || n > 6)
    throw Error(ErrorKind::UnknownModel, "unknown model '" + name + "' (dimension must be 1..6)");
  return n;
}

std::vector<std::pair<int, int>> column_entries(int rows, int col, int first_row = 0) {
  std::vector<std::pair<int, int>> out;
  for (int r = first_row; r < rows; ++r) out.emplace_back(r, col);
  return out;
}

Geometry euclidean(int n) {
  ModelPair pair = euclidean_type_pair(Vector::Ones(n), "i(" + std::to_string(n) + ")");
  MatrixAlgebra bundle = pair.algebra();
  const GroupStructure group = GroupStructure::single(n + 1, BlockKind::AffinePseudoOrthogonal, Vector::Ones(n));
  MutationLayout layout{group, group, column_entries(n, n)};
  const int dim = pair.dim();
  return build_mutation("euclidean:" + std::to_string(n), std::move(bundle), std::move(pair), Matrix::Identity(dim, dim),
                        std::move(layout));
}

Vector lorentz_eta(int n) {
  Vector eta = Vector::Ones(n + 1);
  eta[0] = -1.0;
  return eta;
}

Geometry hyperbolic(int n) {
  ModelPair pair = euclidean_type_pair(Vector::Ones(n), "i(" + std::to_string(n) + ")");
  MutationLayout layout{GroupStructure::single(n + 1, BlockKind::PseudoOrthogonal, lorentz_eta(n)),
                        GroupStructure::single(n + 1, BlockKind::AffinePseudoOrthogonal, Vector::Ones(n)),
                        column_entries(n + 1, 0)};
  const int dim = pair.dim();
  // Both bases list n translations/boosts and then rotations in the same
  // order, so sigma: [[0, v^T], [v, X]] -> (v, X) is the identity matrix.
  return build_mutation("hyperbolic:" + std::to_string(n), lorentz_algebra(n), std::move(pair),
                        Matrix::Identity(dim, dim), std::move(layout));
}

Geometry hyperbolic_klein(int n) {
  MatrixAlgebra g = lorentz_algebra(n);
  std::vector<int> m_idx, h_idx;
  for (int i = 0; i < g.dim(); ++i) (i < n ? m_idx : h_idx).push_back(i);
  Matrix reflect = Matrix::Identity(n + 1, n + 1);
  reflect(1, 1) = -1.0;
  ModelPair pair(g, h_idx, m_idx, {reflect});
  const GroupStructure group = GroupStructure::single(n + 1, BlockKind::PseudoOrthogonal, lorentz_eta(n));
  MutationLayout layout{group, group, column_entries(n + 1, 0)};
  const int dim = pair.dim();
  return build_mutation("hyperbolic-klein:" + std::to_string(n), std::move(g), std::move(pair),
                        Matrix::Identity(dim, dim), std::move(layout));
}

Geometry affine(int n) {
  std::vector<Matrix> basis;
  std::vector<int> m_idx, h_idx;
  for (int i = 0; i < n; ++i) {
    Matrix t = Matrix::Zero(n + 1, n + 1);
    t(i, n) = 1.0;
    m_idx.push_back(static_cast<int>(basis.size()));
    basis.push_back(t);
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Matrix e = Matrix::Zero(n + 1, n + 1);
      e(a, b) = 1.0;
      h_idx.push_back(static_cast<int>(basis.size()));
      basis.push_back(e);
    }
  Matrix reflect = Matrix::Identity(n + 1, n + 1);
  reflect(0, 0) = -1.0;
  MatrixAlgebra g("aff(" + std::to_string(n) + ")", std::move(basis));
  ModelPair pair(g, h_idx, m_idx, {reflect});
  const GroupStructure group = GroupStructure::single(n + 1, BlockKind::AffineGeneral);
  MutationLayout layout{group, group, column_entries(n, n)};
  const int dim = pair.dim();
  return build_mutation("affine:" + std::to_string(n), std::move(g), std::move(pair), Matrix::Identity(dim, dim),
                        std::move(layout));
}

Geometry sl2xh() {
  auto unit = [](int r, int c) {
    Matrix m = Matrix::Zero(4, 4);
    m(r, c) = 1.0;
    return m;
  };
  std::vector<Matrix> basis = {unit(0, 0) - unit(1, 1), unit(0, 1), unit(1, 0), unit(3, 2) - unit(2, 3)};
  MatrixAlgebra g("sl2(R)+so(2)", std::move(basis));
  ModelPair pair(g, {3}, {0, 1, 2});
  GroupStructure group;
  group.ambient_dim = 4;
  group.blocks = {GroupBlock{0, 2, BlockKind::Special, {}}, GroupBlock{2, 2, BlockKind::PseudoOrthogonal, Vector::Ones(2)}};
  MutationLayout layout{group, group, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  return build_mutation("sl2xh", g, std::move(pair), Matrix::Identity(4, 4), std::move(layout));
}

Geometry sphere() {
  ChartDomain domain;
  domain.box = {{0.2, std::numbers::pi - 0.2}, {-std::numbers::pi, std::numbers::pi}};
  domain.reference = Vector::Zero(2);
  domain.reference << std::numbers::pi / 2.0, 0.0;
  return build_gauge_from_metric("sphere:2", {{"1", "0"}, {"0", "sin(theta)^2"}}, {"theta", "phi"}, {2, 0}, domain);
}

Geometry clifton_pohl() {
  ChartDomain domain;
  domain.box = {{-1e6, 1e6}, {-1e6, 1e6}};
  domain.excluded.push_back({Vector::Zero(2), 1e-6});
  domain.reference = Vector::Unit(2, 0);
  const std::string c = "1/(u^2+v^2)";
  return build_gauge_from_metric("clifton-pohl", {{"0", c}, {c, "0"}}, {"u", "v"}, {1, 1}, domain);
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

MatrixAlgebra lorentz_algebra(int n) {
  std::vector<Matrix> basis;
  for (int i = 1; i <= n; ++i) {
    Matrix k = Matrix::Zero(n + 1, n + 1);
    k(0, i) = 1.0;
    k(i, 0) = 1.0;
    basis.push_back(k);
  }
  for (Matrix& r : pseudo_orthogonal_basis(Vector::Ones(n), n + 1, 1)) basis.push_back(std::move(r));
  return MatrixAlgebra("o(1," + std::to_string(n) + ")", std::move(basis));
}

Geometry catalog(const std::string& name) {
  if (starts_with(name, "euclidean:")) return euclidean(parse_dimension(name, "euclidean:"));
  if (starts_with(name, "hyperbolic-klein:")) return hyperbolic_klein(parse_dimension(name, "hyperbolic-klein:"));
  if (starts_with(name, "hyperbolic:")) return hyperbolic(parse_dimension(name, "hyperbolic:"));
  if (starts_with(name, "affine:")) return affine(parse_dimension(name, "affine:"));
  if (name == "sl2xh") return sl2xh();
  if (name == "sphere:2") return sphere();
  if (name == "clifton-pohl") return clifton_pohl();
  throw Error(ErrorKind::UnknownModel, "unknown model '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"euclidean:n", "hyperbolic:n", "hyperbolic-klein:n", "affine:n", "sphere:2", "sl2xh", "clifton-pohl"};
}

std::vector<std::string> mutation_catalog_names() {
  return {"euclidean:2", "hyperbolic:2", "hyperbolic-klein:2", "affine:2", "sl2xh"};
}

}  // namespace cartan
