#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "obslab_cli/cli.hpp"

namespace obslab::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) fail(path, "unknown key '" + item.key() + "'");
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path, std::string("missing key '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
  return j.contains(key) ? number(j.at(key), path + "." + key) : fallback;
}

long long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

void in_range(double v, double lo, double hi, const std::string& path, bool lo_open = false, bool hi_open = false) {
  const bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  if (!ok) {
    std::ostringstream os;
    os << "value " << v << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi << (hi_open ? ")" : "]");
    fail(path, os.str());
  }
}

std::vector<double> radii_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of radii");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const double r = number(j[k], path + "[" + std::to_string(k) + "]");
    if (r <= 0.0) fail(path, "radii must be positive");
    if (!out.empty() && r <= out.back()) fail(path, "radii must be strictly increasing");
    out.push_back(r);
  }
  return out;
}

Point point(const json& j, int dimension, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != dimension) {
    fail(path, "expected an array of " + std::to_string(dimension) + " coordinates");
  }
  Point p{};
  for (int a = 0; a < dimension; ++a) p[a] = number(j[a], path + "[" + std::to_string(a) + "]");
  return p;
}

std::vector<Point> point_list(const json& j, int dimension, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of points");
  std::vector<Point> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(point(j[k], dimension, path + "[" + std::to_string(k) + "]"));
  return out;
}

// {"diagonal": [...]} or {"matrix": [[...], ...]}
QuadraticForm quadratic_form(const json& j, int dimension, const std::string& path) {
  check_keys(j, path, {"diagonal", "matrix"});
  if (j.contains("diagonal") == j.contains("matrix")) fail(path, "give exactly one of 'diagonal' or 'matrix'");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dimension, dimension);
  if (j.contains("diagonal")) {
    const Point d = point(j.at("diagonal"), dimension, path + ".diagonal");
    for (int i = 0; i < dimension; ++i) a(i, i) = d[i];
  } else {
    const json& m = j.at("matrix");
    if (!m.is_array() || static_cast<int>(m.size()) != dimension) fail(path + ".matrix", "wrong row count");
    for (int i = 0; i < dimension; ++i) {
      const Point row = point(m[i], dimension, path + ".matrix[" + std::to_string(i) + "]");
      for (int k = 0; k < dimension; ++k) a(i, k) = row[k];
    }
  }
  try {
    return QuadraticForm(a);
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& origin, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute() || origin.empty()) return path;
  return origin.parent_path() / path;
}

FieldSource field_source(const json& j, int dimension, const std::filesystem::path& origin, const std::string& path) {
  check_keys(j, path, {"fixture", "file", "constant"});
  if (j.size() != 1) fail(path, "give exactly one of 'fixture', 'file' or 'constant'");
  if (j.contains("file")) return FileSource{resolve(origin, string(j.at("file"), path + ".file"))};
  if (j.contains("constant")) return ConstantSource{number(j.at("constant"), path + ".constant")};

  const json& f = j.at("fixture");
  const std::string fp = path + ".fixture";
  check_keys(f, fp, {"kind", "direction", "diagonal", "matrix", "a", "height"});
  FixtureSource s;
  s.kind = string(require(f, fp, "kind"), fp + ".kind");
  auto only = [&](std::initializer_list<const char*> keys) {
    for (const auto& item : f.items()) {
      if (item.key() == "kind") continue;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; })) {
        fail(fp, "key '" + item.key() + "' does not apply to kind '" + s.kind + "'");
      }
    }
  };
  if (s.kind == "halfspace") {
    only({"direction"});
    s.direction = point(require(f, fp, "direction"), dimension, fp + ".direction");
  } else if (s.kind == "polynomial") {
    only({"diagonal", "matrix"});
    json form = json::object();
    if (f.contains("diagonal")) form["diagonal"] = f.at("diagonal");
    if (f.contains("matrix")) form["matrix"] = f.at("matrix");
    s.form = quadratic_form(form, dimension, fp);
  } else if (s.kind == "radial" || s.kind == "one_d") {
    only({"a"});
    s.parameter = number(require(f, fp, "a"), fp + ".a");
    const int want = s.kind == "radial" ? 2 : 1;
    if (dimension != want) fail(fp, "kind '" + s.kind + "' needs dimension " + std::to_string(want));
  } else if (s.kind == "paraboloid") {
    only({"height"});
    s.parameter = number(require(f, fp, "height"), fp + ".height");
  } else {
    fail(fp + ".kind", "unknown fixture kind '" + s.kind + "'");
  }
  return s;
}

GridSpec grid_spec(const json& j, const std::string& path) {
  check_keys(j, path, {"dimension", "lower", "upper", "nodes"});
  const long long n = integer(require(j, path, "dimension"), path + ".dimension");
  if (n < 1 || n > 3) fail(path + ".dimension", "must be 1, 2 or 3");
  const double lo = number_or(j, "lower", path, -1.0);
  const double hi = number_or(j, "upper", path, 1.0);
  const long long nodes = integer(require(j, path, "nodes"), path + ".nodes");
  if (nodes < 3 || nodes > 100000) fail(path + ".nodes", "must be between 3 and 100000");
  try {
    return GridSpec::cube(static_cast<int>(n), lo, hi, static_cast<std::size_t>(nodes));
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

SolverConfig solver_config(const json& j, const std::string& path) {
  check_keys(j, path, {"method", "omega", "tolerance", "max_iterations", "initial_guess"});
  SolverConfig c;
  if (j.contains("method")) {
    const std::string m = string(j.at("method"), path + ".method");
    if (m == "psor") {
      c.method = SolverMethod::PSOR;
    } else if (m == "projected_gradient") {
      c.method = SolverMethod::ProjectedGradient;
    } else {
      fail(path + ".method", "expected 'psor' or 'projected_gradient'");
    }
  }
  c.omega = number_or(j, "omega", path, c.omega);
  in_range(c.omega, 0.0, 2.0, path + ".omega", true, true);
  c.tolerance = number_or(j, "tolerance", path, c.tolerance);
  in_range(c.tolerance, 0.0, 1.0, path + ".tolerance", true);
  if (j.contains("max_iterations")) {
    const long long m = integer(j.at("max_iterations"), path + ".max_iterations");
    if (m < 1 || m > std::numeric_limits<int>::max()) fail(path + ".max_iterations", "must be a positive int");
    c.max_iterations = static_cast<int>(m);
  }
  if (j.contains("initial_guess")) {
    const std::string g = string(j.at("initial_guess"), path + ".initial_guess");
    if (g == "harmonic") {
      c.initial_guess = InitialGuess::HarmonicExtension;
    } else if (g == "constraint") {
      c.initial_guess = InitialGuess::Constraint;
    } else {
      fail(path + ".initial_guess", "expected 'harmonic' or 'constraint'");
    }
  }
  return c;
}

ClassifyOptions classify_options(const json& j, const std::string& path) {
  check_keys(j, path, {"eigen_tol", "residual_margin", "weiss_margin", "blowup_factor", "blowup_radius",
                       "reference_nodes", "regular_starts", "offset_limit", "boundary_margin", "expect"});
  ClassifyOptions o;
  ClassifierConfig& c = o.classifier;
  c.eigen_tol = number_or(j, "eigen_tol", path, c.eigen_tol);
  c.residual_margin = number_or(j, "residual_margin", path, c.residual_margin);
  c.weiss_margin = number_or(j, "weiss_margin", path, c.weiss_margin);
  c.blowup_factor = number_or(j, "blowup_factor", path, c.blowup_factor);
  c.offset_limit = number_or(j, "offset_limit", path, c.offset_limit);
  if (j.contains("blowup_radius")) c.blowup_radius = number(j.at("blowup_radius"), path + ".blowup_radius");
  if (j.contains("reference_nodes")) {
    const long long r = integer(j.at("reference_nodes"), path + ".reference_nodes");
    if (r < 0) fail(path + ".reference_nodes", "must be nonnegative");
    c.reference_nodes = static_cast<std::size_t>(r);
  }
  if (j.contains("regular_starts")) {
    const long long r = integer(j.at("regular_starts"), path + ".regular_starts");
    if (r < 1 || r > 100000) fail(path + ".regular_starts", "out of range");
    c.regular_starts = static_cast<int>(r);
  }
  try {
    c.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  o.boundary_margin_factor = number_or(j, "boundary_margin", path, 0.0);
  in_range(o.boundary_margin_factor, 0.0, 1e6, path + ".boundary_margin");
  if (j.contains("expect")) {
    const json& e = j.at("expect");
    const std::string ep = path + ".expect";
    check_keys(e, ep, {"verdict", "stratum", "fraction"});
    ClassifyExpectation x;
    x.verdict = string(require(e, ep, "verdict"), ep + ".verdict");
    if (x.verdict != "regular" && x.verdict != "singular" && x.verdict != "undetermined") {
      fail(ep + ".verdict", "expected 'regular', 'singular' or 'undetermined'");
    }
    if (e.contains("stratum")) {
      if (x.verdict != "singular") fail(ep + ".stratum", "only meaningful for singular verdicts");
      const long long m = integer(e.at("stratum"), ep + ".stratum");
      if (m < 0 || m > 2) fail(ep + ".stratum", "must be 0, 1 or 2");
      x.stratum = static_cast<int>(m);
    }
    x.fraction = number_or(e, "fraction", ep, 1.0);
    in_range(x.fraction, 0.0, 1.0, ep + ".fraction");
    o.expect = x;
  }
  return o;
}

DiagnosticsOptions diagnostics(const json& j, int dimension, const std::string& path) {
  check_keys(j, path, {"kappa", "growth", "weiss", "monneau", "classify", "frequency"});
  DiagnosticsOptions d;
  d.kappa = number_or(j, "kappa", path, d.kappa);
  in_range(d.kappa, 0.0, 1e3, path + ".kappa", true);

  if (j.contains("growth")) {
    const json& g = j.at("growth");
    const std::string gp = path + ".growth";
    check_keys(g, gp, {"r_min", "r_max", "step", "slack"});
    GrowthOptions o;
    o.r_min_factor = number_or(g, "r_min", gp, o.r_min_factor);
    in_range(o.r_min_factor, 4.0, 1e6, gp + ".r_min");
    o.r_max = number_or(g, "r_max", gp, o.r_max);
    in_range(o.r_max, 0.0, 1e6, gp + ".r_max", true);
    o.step_factor = number_or(g, "step", gp, o.step_factor);
    in_range(o.step_factor, 0.0, 1e6, gp + ".step", true);
    o.slack = number_or(g, "slack", gp, o.slack);
    in_range(o.slack, 0.0, 1.0, gp + ".slack", false, true);
    d.growth = o;
  }
  if (j.contains("weiss")) {
    const json& w = j.at("weiss");
    const std::string wp = path + ".weiss";
    check_keys(w, wp, {"radii", "r_max", "count", "centers"});
    WeissOptions o;
    if (w.contains("radii")) {
      if (w.contains("r_max") || w.contains("count")) fail(wp, "'radii' excludes 'r_max' and 'count'");
      o.radii = radii_list(w.at("radii"), wp + ".radii");
      if (o.radii.size() < 2) fail(wp + ".radii", "a profile needs at least two radii");
    }
    o.r_max = number_or(w, "r_max", wp, o.r_max);
    in_range(o.r_max, 0.0, 1e6, wp + ".r_max", true);
    if (w.contains("count")) {
      const long long c = integer(w.at("count"), wp + ".count");
      if (c < 2 || c > 1000) fail(wp + ".count", "must be between 2 and 1000");
      o.count = static_cast<int>(c);
    }
    if (w.contains("centers")) o.centers = point_list(w.at("centers"), dimension, wp + ".centers");
    d.weiss = o;
  }
  if (j.contains("monneau")) {
    const json& m = j.at("monneau");
    const std::string mp = path + ".monneau";
    check_keys(m, mp, {"centers", "form", "probes", "radii", "singular", "bound_factor"});
    MonneauOptions o;
    o.centers = m.contains("centers") ? point_list(m.at("centers"), dimension, mp + ".centers") : std::vector<Point>{Point{}};
    if (o.centers.empty()) fail(mp + ".centers", "needs at least one point");
    if (m.contains("form")) {
      o.form = quadratic_form(m.at("form"), dimension, mp + ".form");
      if (!o.form->is_admissible()) fail(mp + ".form", "form is not in the blow-up class");
    }
    if (m.contains("probes")) o.probes = boolean(m.at("probes"), mp + ".probes");
    if (!o.form && !o.probes) fail(mp, "nothing to evaluate: give 'form' or enable 'probes'");
    o.radii = radii_list(require(m, mp, "radii"), mp + ".radii");
    if (o.radii.size() < 2) fail(mp + ".radii", "a profile needs at least two radii");
    if (m.contains("singular")) o.singular = boolean(m.at("singular"), mp + ".singular");
    o.bound_factor = number_or(m, "bound_factor", mp, o.bound_factor);
    in_range(o.bound_factor, 0.0, 1e12, mp + ".bound_factor", true);
    d.monneau = o;
  }
  if (j.contains("classify")) d.classify = classify_options(j.at("classify"), path + ".classify");
  if (j.contains("frequency")) {
    const json& f = j.at("frequency");
    const std::string fp = path + ".frequency";
    check_keys(f, fp, {"center", "form", "radii", "expect_lambda", "tolerance", "expect_defined"});
    FrequencyOptions o;
    o.center = f.contains("center") ? point(f.at("center"), dimension, fp + ".center") : Point{};
    o.form = quadratic_form(require(f, fp, "form"), dimension, fp + ".form");
    if (!o.form.is_admissible()) fail(fp + ".form", "form is not in the blow-up class");
    o.radii = radii_list(require(f, fp, "radii"), fp + ".radii");
    if (o.radii.size() < 2) fail(fp + ".radii", "a log-log fit needs at least two radii");
    if (f.contains("expect_lambda")) o.expect_lambda = number(f.at("expect_lambda"), fp + ".expect_lambda");
    o.tolerance = number_or(f, "tolerance", fp, o.tolerance);
    in_range(o.tolerance, 0.0, 1e6, fp + ".tolerance", true);
    if (f.contains("expect_defined")) o.expect_defined = boolean(f.at("expect_defined"), fp + ".expect_defined");
    d.frequency = o;
  }
  return d;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(j, "config", {"version", "problem", "solver", "solution_file", "diagnostics", "seed", "output", "reports"});
  const long long version = integer(require(j, "config", "version"), "config.version");
  if (version != kConfigVersion) {
    fail("config.version", "unsupported version " + std::to_string(version) + " (expected " +
                               std::to_string(kConfigVersion) + ")");
  }

  RunConfig c;
  c.source = origin;
  int dimension = 0;
  if (j.contains("problem")) {
    const json& p = j.at("problem");
    check_keys(p, "problem", {"form", "grid", "boundary", "obstacle"});
    const std::string form = p.contains("form") ? string(p.at("form"), "problem.form") : "normalized";
    if (form != "normalized" && form != "general") fail("problem.form", "expected 'normalized' or 'general'");
    c.normalized = form == "normalized";
    c.grid = grid_spec(require(p, "problem", "grid"), "problem.grid");
    dimension = c.grid->dimension();
    c.boundary = field_source(require(p, "problem", "boundary"), dimension, origin, "problem.boundary");
    if (c.normalized && p.contains("obstacle")) fail("problem.obstacle", "normalized problems have no obstacle");
    if (!c.normalized) c.obstacle = field_source(require(p, "problem", "obstacle"), dimension, origin, "problem.obstacle");
  }
  if (j.contains("solver")) c.solver = solver_config(j.at("solver"), "solver");
  if (j.contains("solution_file")) c.solution_file = resolve(origin, string(j.at("solution_file"), "solution_file"));
  if (j.contains("diagnostics")) {
    if (dimension == 0) fail("diagnostics", "needs a 'problem' section for the grid dimension");
    c.diagnostics = diagnostics(j.at("diagnostics"), dimension, "diagnostics");
  }
  if (j.contains("seed")) {
    const long long s = integer(j.at("seed"), "seed");
    if (s < 0 || s > std::numeric_limits<std::uint32_t>::max()) fail("seed", "must fit in 32 bits unsigned");
    c.seed = static_cast<unsigned>(s);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"dir", "rasters"});
    if (o.contains("dir")) c.output_dir = resolve(origin, string(o.at("dir"), "output.dir"));
    if (o.contains("rasters")) c.rasters = boolean(o.at("rasters"), "output.rasters");
  }
  if (j.contains("reports")) {
    const json& r = j.at("reports");
    if (!r.is_array()) fail("reports", "expected an array of paths");
    for (std::size_t k = 0; k < r.size(); ++k) {
      c.reports.push_back(resolve(origin, string(r[k], "reports[" + std::to_string(k) + "]")));
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) {
    if (*flag == 0) throw ConfigError("--threads must be at least 1");
    return *flag;
  }
  const char* env = std::getenv("OBSLAB_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  errno = 0;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (errno != 0 || *end != '\0' || v == 0 || v > 1024) {
    throw ConfigError(std::string("OBSLAB_THREADS must be an integer in [1, 1024], got '") + env + "'");
  }
  return static_cast<unsigned>(v);
}

}  // namespace obslab::cli
