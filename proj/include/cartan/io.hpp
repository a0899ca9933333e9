#pragma once

#include <string>

#include <json.hpp>

#include "cartan/analysis.hpp"
#include "cartan/geometry.hpp"

namespace cartan {

using Json = nlohmann::ordered_json;

/// Serializes with every number printed as %.17g so doubles round-trip
/// bit-exactly.
std::string dump_json(const Json& value, int indent = 2);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& value);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& value);

/// Mutation models and metric gauges. Section gauges throw Unsupported.
Json geometry_to_json(const Geometry& geometry);
/// Throws ParseError for malformed documents and the usual construction
/// errors for invalid geometries.
Geometry geometry_from_json(const Json& value);

Geometry load_geometry(const std::string& path);
void save_geometry(const Geometry& geometry, const std::string& path);

/// Catalog name, or a path to a geometry JSON file.
Geometry resolve_model(const std::string& selector);

Json report_to_json(const CompletenessReport& report);
Json report_to_json(const ConnectResult& result, const ConnectBudget& budget, std::uint64_t seed);
Json report_to_json(const MapReport& report, std::uint64_t seed);

}  // namespace cartan
