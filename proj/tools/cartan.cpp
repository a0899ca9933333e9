#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cartan/analysis.hpp"
#include "cartan/catalog.hpp"
#include "cartan/error.hpp"
#include "cartan/io.hpp"
#include "cartan/transport.hpp"
#include "cartan/verify.hpp"

using namespace cartan;

namespace {

constexpr int kUsage = 2;
constexpr int kFailed = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size() || !std::isfinite(x)) throw UsageError("not a number: '" + s + "'");
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Vector parse_vector(const std::string& s) {
  if (s.empty()) throw UsageError("empty vector");
  const auto parts = split(s, ',');
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_number(parts[i]);
  return v;
}

Matrix parse_matrix(const std::string& s) {
  const auto rows = split(s, ';');
  if (rows.empty()) throw UsageError("empty matrix");
  std::vector<Vector> parsed;
  for (const auto& r : rows) parsed.push_back(parse_vector(r));
  Matrix m(static_cast<Eigen::Index>(parsed.size()), parsed.front().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].size() != m.cols()) throw UsageError("ragged matrix rows in '" + s + "'");
    m.row(static_cast<Eigen::Index>(i)) = parsed[i].transpose();
  }
  return m;
}

std::string format(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct Common {
  std::string model;
  std::string out;
  std::optional<std::uint64_t> seed;

  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("CARTAN_SEED")) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0') throw UsageError("CARTAN_SEED must be a non-negative integer");
      return v;
    }
    return 1;
  }
};

void add_common(CLI::App* sub, Common& c, bool model = true) {
  if (model) sub->add_option("--model", c.model, "catalog name or geometry JSON path")->required();
  sub->add_option("--out", c.out, "output file (default: standard output)");
  sub->add_option("--seed", c.seed, "random seed (default: $CARTAN_SEED, else 1)");
}

BundlePoint parse_base(const Geometry& geo, const std::string& base) {
  if (base.empty()) return base_point(geo);
  if (geo.is_mutation()) {
    const Matrix p = parse_matrix(base);
    const int n = geo.mutation()->bundle_algebra().ambient_dim();
    if (p.rows() != n || p.cols() != n) throw UsageError("--base must be a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    return BundlePoint::group(p);
  }
  const Vector x = parse_vector(base);
  const int n = geo.model().algebra().ambient_dim();
  return BundlePoint::chart(x, Matrix::Identity(n, n));
}

Vector checked_vector(const std::string& s, int dim, const std::string& flag) {
  const Vector v = parse_vector(s);
  if (v.size() != dim) throw UsageError(flag + " needs " + std::to_string(dim) + " components");
  return v;
}

// Mutation models: p exp(tX) exp(tY). Gauge models: the chart segment x0 + t u.
LiftedCurve make_curve(const Geometry& geo, const BundlePoint& base, const std::string& direction,
                       const std::string& twist, const std::string& chart_velocity) {
  if (const auto* m = geo.mutation()) {
    const Vector x = checked_vector(direction, geo.model().dim_m(), "--direction");
    const Vector y = twist.empty() ? Vector::Zero(geo.model().dim_h()) : checked_vector(twist, geo.model().dim_h(), "--twist");
    return twisted_geodesic_lift(*m, base.g, x, y);
  }
  const GaugeGeometry& gauge = *geo.gauge();
  if (chart_velocity.empty()) throw UsageError("gauge models need --chart-velocity");
  const Vector u = checked_vector(chart_velocity, gauge.chart_dim(), "--chart-velocity");
  const Vector x0 = base.x;
  return chart_lift(
      gauge, [x0, u](double t) { return Vector(x0 + t * u); }, [u](double) { return u; },
      -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

void check_times(double t_max, double step) {
  if (!(t_max > 0.0)) throw UsageError("--t-max must be positive");
  if (!(step > 0.0) || step > t_max) throw UsageError("--step must be in (0, t-max]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for reductive Cartan geometries"};
  app.require_subcommand(1, 1);

  Common common;
  std::string direction, base, twist, chart_velocity, vector_arg, j0, j1, target, from;
  double t_max = 1.0, step = 0.01;
  std::vector<std::string> suites;
  int probe_samples = 20, h_samples = 256, newton = 8;
  bool random_point_flag = false, no_oracle = false;
  std::string show;

  auto* trace_cmd = app.add_subcommand("trace-geodesic", "trace a geodesic and write a trace CSV");
  add_common(trace_cmd, common);
  trace_cmd->add_option("--direction", direction, "initial direction in m-coordinates, comma-separated")->required();
  trace_cmd->add_option("--base", base, "start: bundle matrix (rows separated by ';') or chart point");
  trace_cmd->add_option("--t-max", t_max, "end time")->capture_default_str();
  trace_cmd->add_option("--step", step, "sample/integration step")->capture_default_str();

  auto* transport_cmd = app.add_subcommand("transport", "parallel transport along a curve, CSV of t and Y(t)");
  add_common(transport_cmd, common);
  auto* develop_cmd = app.add_subcommand("develop", "development of a curve into the model group, trace CSV");
  add_common(develop_cmd, common);
  for (auto* sub : {transport_cmd, develop_cmd}) {
    sub->add_option("--direction", direction, "mutation models: m-part X of p exp(tX) exp(tY)");
    sub->add_option("--twist", twist, "mutation models: h-part Y (default 0)");
    sub->add_option("--chart-velocity", chart_velocity, "gauge models: velocity u of the chart segment x0 + t u");
    sub->add_option("--base", base, "start: bundle matrix or chart point");
    sub->add_option("--t-max", t_max, "end time")->capture_default_str();
    sub->add_option("--step", step, "RK4 step")->capture_default_str();
  }
  transport_cmd->add_option("--vector", vector_arg, "initial vector in m-coordinates")->required();

  auto* jacobi_cmd = app.add_subcommand("jacobi", "Jacobi field along a geodesic, CSV with the variation oracle");
  add_common(jacobi_cmd, common);
  jacobi_cmd->add_option("--direction", direction, "geodesic direction in m-coordinates")->required();
  jacobi_cmd->add_option("--j0", j0, "J(0) in m-coordinates")->required();
  jacobi_cmd->add_option("--j1", j1, "J'(0) in m-coordinates")->required();
  jacobi_cmd->add_option("--base", base, "start: bundle matrix");
  jacobi_cmd->add_option("--t-max", t_max, "end time")->capture_default_str();
  jacobi_cmd->add_option("--step", step, "RK4 step")->capture_default_str();
  jacobi_cmd->add_flag("--no-oracle", no_oracle, "skip the geodesic-variation comparison");

  auto* curvature_cmd = app.add_subcommand("curvature", "curvature on basis pairs and a constant-curvature probe, JSON");
  add_common(curvature_cmd, common);
  curvature_cmd->add_option("--base", base, "evaluation point: bundle matrix or chart point");
  curvature_cmd->add_flag("--random-point", random_point_flag, "evaluate at a seeded random point");
  curvature_cmd->add_option("--probe-samples", probe_samples, "points for the constant-curvature probe")
      ->capture_default_str()
      ->check(CLI::Range(2, 100000));

  auto* verify_cmd = app.add_subcommand("verify", "run verification suites, JSON summary");
  add_common(verify_cmd, common, false);
  verify_cmd->add_option("--suite", suites, "suite name or 'all' (repeatable, comma-separated)")
      ->delimiter(',')
      ->required();

  auto* connect_cmd = app.add_subcommand("connect", "search a geodesic from p to the fiber of q, JSON report");
  add_common(connect_cmd, common);
  connect_cmd->add_option("--target", target, "q: matrix, rows separated by ';'; a smaller matrix fills the top-left block")
      ->required();
  connect_cmd->add_option("--from", from, "p (default identity)");
  connect_cmd->add_option("--h-samples", h_samples, "H samples in the search budget")->capture_default_str()->check(CLI::Range(1, 1000000));
  connect_cmd->add_option("--newton", newton, "Newton iterations per sample")->capture_default_str()->check(CLI::Range(0, 1000));

  auto* catalog_cmd = app.add_subcommand("catalog", "list built-in models or print one as geometry JSON");
  add_common(catalog_cmd, common, false);
  catalog_cmd->add_option("--show", show, "model to print as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const std::uint64_t seed = common.resolved_seed();

    if (*catalog_cmd) {
      Output out(common.out);
      if (show.empty()) {
        for (const std::string& name : catalog_names()) out.stream() << name << '\n';
      } else {
        out.stream() << dump_json(geometry_to_json(resolve_model(show))) << '\n';
      }
      return 0;
    }

    if (*verify_cmd) {
      std::vector<std::string> names;
      for (const std::string& s : suites) {
        if (s == "all") {
          for (const std::string& n : suite_names()) names.push_back(n);
        } else if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end()) {
          throw UsageError("unknown suite '" + s + "'");
        } else {
          names.push_back(s);
        }
      }
      std::sort(names.begin(), names.end());
      names.erase(std::unique(names.begin(), names.end()), names.end());
      Output out(common.out);
      const std::vector<SuiteResult> results = run_suites(names, seed);
      bool pass = true;
      Json doc = {{"seed", seed}, {"suites", Json::array()}};
      for (const SuiteResult& r : results) {
        doc["suites"].push_back(suite_to_json(r));
        pass = pass && r.pass;
      }
      doc["verdict"] = pass ? "pass" : "fail";
      out.stream() << dump_json(doc) << '\n';
      return pass ? 0 : kFailed;
    }

    const Geometry geo = resolve_model(common.model);

    if (*trace_cmd) {
      check_times(t_max, step);
      const Vector x = checked_vector(direction, geo.model().dim_m(), "--direction");
      const BundlePoint p = parse_base(geo, base);
      const Trace trace = geodesic({geo, p, x, 0.0, t_max, step});
      Output out(common.out);
      write_trace_csv(out.stream(), trace);
      return 0;
    }

    if (*transport_cmd || *develop_cmd) {
      check_times(t_max, step);
      const BundlePoint p = parse_base(geo, base);
      if (geo.is_mutation() && direction.empty()) throw UsageError("mutation models need --direction");
      const LiftedCurve curve = make_curve(geo, p, direction, twist, chart_velocity);
      if (*develop_cmd) {
        const Trace trace = develop(geo, curve, 0.0, t_max, step);
        Output out(common.out);
        write_trace_csv(out.stream(), trace);
        return 0;
      }
      Vector v = checked_vector(vector_arg, geo.model().dim_m(), "--vector");
      std::ostringstream csv;
      csv << 't';
      for (int i = 0; i < v.size(); ++i) csv << ",y" << i + 1;
      csv << '\n';
      auto row = [&](double t) {
        csv << format(t);
        for (int i = 0; i < v.size(); ++i) csv << ',' << format(v[i]);
        csv << '\n';
      };
      row(0.0);
      const long n = std::lround(std::ceil(t_max / step - 1e-9));
      double t = 0.0;
      for (long k = 1; k <= n; ++k) {
        const double next = k == n ? t_max : k * step;
        v = parallel_transport(geo, curve, v, t, next, step);
        t = next;
        row(t);
      }
      Output out(common.out);
      out.stream() << csv.str();
      return 0;
    }

    if (*jacobi_cmd) {
      check_times(t_max, step);
      if (!geo.is_mutation()) throw UsageError("jacobi needs a mutation model");
      const int dm = geo.model().dim_m();
      const GeodesicSpec spec{geo, parse_base(geo, base), checked_vector(direction, dm, "--direction"), 0.0, t_max, step};
      const JacobiTrace trace =
          jacobi_field(spec, {checked_vector(j0, dm, "--j0"), checked_vector(j1, dm, "--j1")}, step, !no_oracle);
      Output out(common.out);
      write_jacobi_csv(out.stream(), trace);
      return 0;
    }

    if (*curvature_cmd) {
      BundlePoint p = parse_base(geo, base);
      if (random_point_flag) {
        Rng rng(seed);
        p = random_point(geo, rng);
      }
      const ModelPair& model = geo.model();
      Json pairs = Json::array();
      double torsion_max = 0.0;
      for (int i = 0; i < model.dim_m(); ++i)
        for (int j = i + 1; j < model.dim_m(); ++j) {
          const CurvatureValue c =
              curvature(geo, p, model.from_m(Vector::Unit(model.dim_m(), i)), model.from_m(Vector::Unit(model.dim_m(), j)));
          torsion_max = std::max(torsion_max, c.omega_m.size() ? c.omega_m.cwiseAbs().maxCoeff() : 0.0);
          pairs.push_back({{"i", i}, {"j", j}, {"omega_m", vector_to_json(c.omega_m)}, {"omega_h", vector_to_json(c.omega_h)}});
        }
      const ProbeReport probe = constant_curvature_probe(geo, probe_samples, seed);
      Json point = geo.is_mutation() ? Json{{"p", matrix_to_json(p.g)}}
                                     : Json{{"x", vector_to_json(p.x)}, {"h", matrix_to_json(p.g)}};
      const Json doc = {{"model", geo.name()},
                        {"point", point},
                        {"basis_pairs", pairs},
                        {"max_torsion", torsion_max},
                        {"probe",
                         {{"samples", probe.n_samples},
                          {"seed", probe.seed},
                          {"max_deviation", probe.max_deviation},
                          {"tolerance", probe.tolerance},
                          {"constant", probe.constant}}}};
      Output out(common.out);
      out.stream() << dump_json(doc) << '\n';
      return 0;
    }

    if (*connect_cmd) {
      const MutationGeometry* m = geo.mutation();
      if (m == nullptr) throw UsageError("connect needs a mutation model");
      const int n = m->bundle_algebra().ambient_dim();
      auto embed = [n](const Matrix& a, const std::string& flag) {
        if (a.rows() != a.cols() || a.rows() > n)
          throw UsageError(flag + " must be square of size at most " + std::to_string(n));
        Matrix out = Matrix::Identity(n, n);
        out.topLeftCorner(a.rows(), a.cols()) = a;
        return out;
      };
      const Matrix q = embed(parse_matrix(target), "--target");
      const Matrix p = from.empty() ? Matrix::Identity(n, n) : embed(parse_matrix(from), "--from");
      const ConnectBudget budget{h_samples, newton};
      const ConnectResult r = search_geodesic(geo, p, q, seed, budget);
      Output out(common.out);
      out.stream() << dump_json(report_to_json(r, budget, seed)) << '\n';
      if (!r.found) {
        std::cerr << "NoGeodesicFound: no geodesic after " << r.attempts << " H-samples x " << newton
                  << " Newton iterations\n";
        return kFailed;
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
