#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cartan/calculus.hpp"
#include "cartan/transport.hpp"

namespace cartan {

/// Frobenius errors |(exp(tX/n) exp(tY/n))^n - exp(t(X+Y))| for each n.
std::vector<double> trotter_probe(const MatrixAlgebra& algebra, const AlgebraVector& x, const AlgebraVector& y,
                                  double t, const std::vector<int>& n_list);

struct DirectionRecord {
  Vector direction;  // m-coordinates, already signed
  double max_time = 0.0;
  TraceStatus status = TraceStatus::Completed;
};

enum class CompletenessVerdict { CompleteUpToHorizon, IncompleteWitness };

struct CompletenessReport {
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<DirectionRecord> records;
  CompletenessVerdict verdict = CompletenessVerdict::CompleteUpToHorizon;
  std::optional<DirectionRecord> witness;  // earliest escape
  /// Right-translation flows p exp(t Y), Y in h, reproduce omega = Y up to
  /// +-horizon.
  bool vertical_complete = true;
  double vertical_residual = 0.0;
};

/// Integrates geodesics from the base point (identity, or the chart
/// reference) in `n_directions` seeded unit directions, both signs, plus
/// the basis vectors and, for indefinite gauge metrics, the null
/// combinations (e_i +- e_j)/sqrt 2.
CompletenessReport completeness_report(const Geometry& geometry, double horizon, int n_directions,
                                       std::uint64_t seed, double step = 1e-2);

struct ConnectBudget {
  int h_samples = 256;
  int newton_iterations = 8;
};

struct ConnectResult {
  bool found = false;
  Vector x_m;
  Matrix h;
  double residual = 0.0;  // |exp(X) - p^{-1} q h|, max-norm
  int attempts = 0;
  int log_failures = 0;
};

/// Searches X in m with exp(X) in p^{-1} q H (Klein models only) and never
/// throws for a failed search.
ConnectResult search_geodesic(const Geometry& geometry, const Matrix& p, const Matrix& q, std::uint64_t seed = 1,
                              ConnectBudget budget = {});

/// Same, returning X or throwing NoGeodesicFound.
Vector connect_by_geodesic(const Geometry& geometry, const Matrix& p, const Matrix& q, std::uint64_t seed = 1,
                           ConnectBudget budget = {});

/// A in SL2(R) is exp of some sl2 element iff trace(A) > -2 or A = -I.
bool sl2_in_exp_image(const Matrix& a);

struct GeodesicMapSpec {
  Geometry source;
  Geometry target;
  Matrix phi;  // dim m_target x dim m_source
  BundlePoint source_base;
  BundlePoint target_base;
  /// Source base coordinates -> target base coordinates.
  std::function<Vector(const Vector&)> point_map;
  /// Inverse of point_map, used when the spec is swapped.
  std::function<Vector(const Vector&)> inverse_point_map;
};

GeodesicMapSpec swapped(const GeodesicMapSpec& spec);

struct MapReport {
  std::vector<double> t_grid;
  std::vector<double> mismatches;  // per sampled geodesic
  double max_mismatch = 0.0;
  double tolerance = 0.0;
  bool geodesics_match = false;
  ProbeReport source_probe;
  ProbeReport target_probe;
  bool beltrami_consistent = false;  // source constant implies target constant
  bool is_geodesic_map = false;
};

MapReport verify_geodesic_map(const GeodesicMapSpec& spec, int n_geodesics, const std::vector<double>& t_grid,
                              double tolerance, std::uint64_t seed = 1, double step = 1e-3);

/// For two mutation models on the same bundle group, the largest deviation
/// of omega_target(v) from (sigma_t sigma_s^{-1}) omega_source(v) over random
/// tangents, and of the m-block of that map from `phi`.
double mutation_relation_residual(const Geometry& source, const Geometry& target, const Matrix& phi, int n_samples,
                                  std::uint64_t seed);

std::string to_string(CompletenessVerdict verdict);

}  // namespace cartan
