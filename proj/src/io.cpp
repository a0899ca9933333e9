#include "cartan/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cartan/catalog.hpp"
#include "cartan/error.hpp"

namespace cartan {

namespace {

void emit(const Json& value, int indent, int depth, std::string& out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (value.type()) {
    case Json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(key).dump();
        out += pretty ? ": " : ":";
        emit(item, indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& item : value) flat = flat && !item.is_structured();
      out += '[';
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += pretty && flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        emit(item, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = value.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += value.dump();
  }
}

std::string block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::General:
      return "general";
    case BlockKind::Special:
      return "special";
    case BlockKind::PseudoOrthogonal:
      return "pseudo-orthogonal";
    case BlockKind::AffineGeneral:
      return "affine-general";
    case BlockKind::AffinePseudoOrthogonal:
      return "affine-pseudo-orthogonal";
  }
  return "general";
}

BlockKind block_kind_from(const std::string& s) {
  for (BlockKind k : {BlockKind::General, BlockKind::Special, BlockKind::PseudoOrthogonal, BlockKind::AffineGeneral,
                      BlockKind::AffinePseudoOrthogonal})
    if (block_kind_name(k) == s) return k;
  throw Error(ErrorKind::ParseError, "unknown block kind '" + s + "'");
}

Json group_to_json(const GroupStructure& g) {
  Json blocks = Json::array();
  for (const GroupBlock& b : g.blocks) {
    Json block = {{"offset", b.offset}, {"size", b.size}, {"kind", block_kind_name(b.kind)}};
    if (b.eta.size() > 0) block["eta"] = vector_to_json(b.eta);
    blocks.push_back(std::move(block));
  }
  return {{"ambient_dim", g.ambient_dim}, {"blocks", blocks}};
}

GroupStructure group_from_json(const Json& j) {
  GroupStructure g;
  g.ambient_dim = j.at("ambient_dim").get<int>();
  for (const Json& b : j.at("blocks")) {
    GroupBlock block;
    block.offset = b.at("offset").get<int>();
    block.size = b.at("size").get<int>();
    block.kind = block_kind_from(b.at("kind").get<std::string>());
    if (b.contains("eta")) block.eta = vector_from_json(b.at("eta"));
    g.blocks.push_back(std::move(block));
  }
  return g;
}

Json matrices_to_json(const std::vector<Matrix>& ms) {
  Json out = Json::array();
  for (const Matrix& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> matrices_from_json(const Json& j) {
  std::vector<Matrix> out;
  for (const Json& m : j) out.push_back(matrix_from_json(m));
  return out;
}

Json model_to_json(const ModelPair& model) {
  Json out = {{"algebra", model.algebra().name()},
              {"basis", matrices_to_json(model.algebra().basis())},
              {"h_indices", model.h_indices()},
              {"m_indices", model.m_indices()}};
  if (!model.h_generators().empty()) out["h_generators"] = matrices_to_json(model.h_generators());
  return out;
}

ModelPair model_from_json(const Json& j) {
  MatrixAlgebra g(j.value("algebra", std::string("g")), matrices_from_json(j.at("basis")));
  std::vector<Matrix> gens;
  if (j.contains("h_generators")) gens = matrices_from_json(j.at("h_generators"));
  return ModelPair(std::move(g), j.at("h_indices").get<std::vector<int>>(), j.at("m_indices").get<std::vector<int>>(),
                   std::move(gens));
}

Json domain_to_json(const ChartDomain& d) {
  Json box = Json::array();
  for (const auto& [lo, hi] : d.box) box.push_back(Json::array({lo, hi}));
  Json exclude = Json::array();
  for (const auto& ball : d.excluded)
    exclude.push_back({{"center", vector_to_json(ball.center)}, {"radius", ball.radius}});
  return {{"box", box}, {"exclude", exclude}, {"reference", vector_to_json(d.reference)}};
}

ChartDomain domain_from_json(const Json& j) {
  ChartDomain d;
  for (const Json& b : j.at("box")) {
    if (!b.is_array() || b.size() != 2) throw Error(ErrorKind::ParseError, "box entries are [lo, hi] pairs");
    d.box.emplace_back(b[0].get<double>(), b[1].get<double>());
  }
  if (j.contains("exclude"))
    for (const Json& ball : j.at("exclude"))
      d.excluded.push_back({vector_from_json(ball.at("center")), ball.at("radius").get<double>()});
  if (j.contains("reference")) {
    d.reference = vector_from_json(j.at("reference"));
  } else {
    d.reference = Vector(d.dim());
    for (int i = 0; i < d.dim(); ++i) d.reference[i] = 0.5 * (d.box[i].first + d.box[i].second);
  }
  return d;
}

Json mutation_to_json(const MutationGeometry& m) {
  Json entries = Json::array();
  for (const auto& [r, c] : m.layout().base_entries) entries.push_back(Json::array({r, c}));
  return {{"kind", "mutation"},
          {"name", m.name()},
          {"model", model_to_json(m.model())},
          {"model_group", group_to_json(m.layout().model_group)},
          {"bundle_algebra", m.bundle_algebra().name()},
          {"bundle_basis", matrices_to_json(m.bundle_algebra().basis())},
          {"bundle_group", group_to_json(m.layout().bundle_group)},
          {"sigma", matrix_to_json(m.sigma())},
          {"base_entries", entries}};
}

Json gauge_to_json(const GaugeGeometry& g) {
  const MetricGauge* metric = g.metric();
  if (metric == nullptr || g.section())
    throw Error(ErrorKind::Unsupported, "only metric gauges can be serialized");
  Json entries = Json::array();
  for (const auto& row : metric->entries()) {
    Json r = Json::array();
    for (const ExpressionAst& e : row) r.push_back(e.source());
    entries.push_back(std::move(r));
  }
  const auto [p, q] = metric->signature();
  return {{"kind", "gauge"},
          {"name", g.name()},
          {"model", model_to_json(g.model())},
          {"metric", entries},
          {"variables", metric->entries().front().front().variables()},
          {"signature", Json::array({p, q})},
          {"derivatives", metric->mode() == DerivativeMode::Analytic ? "analytic" : "central-difference"},
          {"domain", domain_to_json(g.domain())}};
}

Geometry parse_geometry(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const std::string name = j.value("name", std::string("custom"));
  if (kind == "mutation") {
    const ModelPair model = model_from_json(j.at("model"));
    MatrixAlgebra bundle(j.value("bundle_algebra", std::string("p")), matrices_from_json(j.at("bundle_basis")));
    MutationLayout layout;
    layout.model_group = group_from_json(j.at("model_group"));
    layout.bundle_group = group_from_json(j.at("bundle_group"));
    for (const Json& e : j.at("base_entries")) layout.base_entries.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    return Geometry(build_mutation(name, std::move(bundle), model, matrix_from_json(j.at("sigma")), std::move(layout)));
  }
  if (kind == "gauge") {
    const auto metric = j.at("metric").get<std::vector<std::vector<std::string>>>();
    const auto variables = j.at("variables").get<std::vector<std::string>>();
    const auto sig = j.at("signature").get<std::vector<int>>();
    if (sig.size() != 2) throw Error(ErrorKind::ParseError, "signature is [p, q]");
    const std::string mode = j.value("derivatives", std::string("analytic"));
    if (mode != "analytic" && mode != "central-difference")
      throw Error(ErrorKind::ParseError, "derivatives must be analytic or central-difference");
    return Geometry(build_gauge_from_metric(
        name, metric, variables, {sig[0], sig[1]}, domain_from_json(j.at("domain")),
        mode == "analytic" ? DerivativeMode::Analytic : DerivativeMode::CentralDifference));
  }
  throw Error(ErrorKind::ParseError, "kind must be mutation or gauge");
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::string out;
  emit(value, indent, 0, out);
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& value) {
  if (!value.is_array() || value.empty()) throw Error(ErrorKind::ParseError, "matrix must be a non-empty array of rows");
  const std::size_t cols = value.front().size();
  Matrix m(static_cast<Eigen::Index>(value.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < value.size(); ++r) {
    if (!value[r].is_array() || value[r].size() != cols) throw Error(ErrorKind::ParseError, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!value[r][c].is_number()) throw Error(ErrorKind::ParseError, "matrix entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value[r][c].get<double>();
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& value) {
  if (!value.is_array()) throw Error(ErrorKind::ParseError, "vector must be an array");
  Vector v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_number()) throw Error(ErrorKind::ParseError, "vector entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = value[i].get<double>();
  }
  return v;
}

Json geometry_to_json(const Geometry& geometry) {
  return geometry.is_mutation() ? mutation_to_json(*geometry.mutation()) : gauge_to_json(*geometry.gauge());
}

Geometry geometry_from_json(const Json& value) {
  try {
    return parse_geometry(value);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("geometry JSON: ") + e.what());
  }
}

Geometry load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnknownModel, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buffer.str());
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("geometry JSON: ") + e.what());
  }
  return geometry_from_json(doc);
}

void save_geometry(const Geometry& geometry, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << dump_json(geometry_to_json(geometry)) << '\n';
}

Geometry resolve_model(const std::string& selector) {
  if (std::filesystem::is_regular_file(selector)) return load_geometry(selector);
  return catalog(selector);
}

Json report_to_json(const CompletenessReport& report) {
  Json witnesses = Json::array();
  if (report.witness)
    witnesses.push_back({{"direction", vector_to_json(report.witness->direction)},
                         {"t_escape", report.witness->max_time},
                         {"status", report.witness->status == TraceStatus::BlowUp ? "BlowUp" : "LeftChart"}});
  Json records = Json::array();
  for (const DirectionRecord& r : report.records)
    records.push_back({{"direction", vector_to_json(r.direction)},
                       {"max_time", r.max_time},
                       {"status", r.status == TraceStatus::Completed ? "Completed"
                                  : r.status == TraceStatus::BlowUp ? "BlowUp"
                                                                    : "LeftChart"}});
  return {{"verdict", to_string(report.verdict)},
          {"witnesses", witnesses},
          {"residuals", {{"vertical", report.vertical_residual}}},
          {"seed", report.seed},
          {"budget", {{"horizon", report.horizon}, {"directions", report.records.size()}}},
          {"vertical_complete", report.vertical_complete},
          {"records", records}};
}

Json report_to_json(const ConnectResult& result, const ConnectBudget& budget, std::uint64_t seed) {
  Json out = {{"verdict", result.found ? "Found" : "NoGeodesicFound"}, {"witnesses", Json::array()}};
  if (result.found) out["witnesses"].push_back({{"x_m", vector_to_json(result.x_m)}, {"h", matrix_to_json(result.h)}});
  out["residuals"] = {{"exp", result.residual}};
  out["seed"] = seed;
  out["budget"] = {{"h_samples", budget.h_samples},
                   {"newton_iterations", budget.newton_iterations},
                   {"attempts", result.attempts},
                   {"log_failures", result.log_failures}};
  return out;
}

Json report_to_json(const MapReport& report, std::uint64_t seed) {
  return {{"verdict", report.is_geodesic_map ? "GeodesicMap" : "NotGeodesicMap"},
          {"witnesses", Json::array()},
          {"residuals",
           {{"max_mismatch", report.max_mismatch},
            {"source_curvature_deviation", report.source_probe.max_deviation},
            {"target_curvature_deviation", report.target_probe.max_deviation}}},
          {"seed", seed},
          {"budget", {{"geodesics", report.mismatches.size()}, {"t_grid", report.t_grid}}},
          {"geodesics_match", report.geodesics_match},
          {"source_constant", report.source_probe.constant},
          {"target_constant", report.target_probe.constant},
          {"beltrami_consistent", report.beltrami_consistent}};
}

}  // namespace cartan
