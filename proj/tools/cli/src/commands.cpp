#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include "json.hpp"
#include "obslab/field_io.hpp"
#include "obslab_cli/cli.hpp"

namespace obslab::cli {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Shortest round-trip decimal form; identical bytes on every run.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ojson point_json(const Point& p, int n) {
  ojson a = ojson::array();
  for (int k = 0; k < n; ++k) a.push_back(p[k]);
  return a;
}

std::string point_csv(const Point& p) { return num(p[0]) + "," + num(p[1]) + "," + num(p[2]); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

ojson grid_json(const GridSpec& g) {
  ojson j;
  j["dimension"] = g.dimension();
  ojson lower = ojson::array();
  ojson upper = ojson::array();
  ojson nodes = ojson::array();
  for (int a = 0; a < g.dimension(); ++a) {
    lower.push_back(g.lower(a));
    upper.push_back(g.upper(a));
    nodes.push_back(g.nodes(a));
  }
  j["lower"] = lower;
  j["upper"] = upper;
  j["nodes"] = nodes;
  j["spacing"] = g.spacing();
  return j;
}

const char* method_name(SolverMethod m) { return m == SolverMethod::PSOR ? "psor" : "projected_gradient"; }

/// Runs body(k) for k in [0, count) on `threads` workers. Each index is
/// handled exactly once; results must be stored per index by the body.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) body(k);
    });
  }
  for (auto& t : pool) t.join();
}

ScalarField build_field(const FieldSource& source, const GridSpec& g) {
  if (const auto* c = std::get_if<ConstantSource>(&source)) {
    return ScalarField::sample(g, [v = c->value](const Point&) { return v; });
  }
  if (const auto* f = std::get_if<FileSource>(&source)) {
    ScalarField field = read_field(f->path);
    if (!(field.grid() == g)) throw ConfigError(f->path.string() + ": grid does not match problem.grid");
    return field;
  }
  const auto& fx = std::get<FixtureSource>(source);
  const int n = g.dimension();
  if (fx.kind == "halfspace") return sample(halfspace(fx.direction, n), g);
  if (fx.kind == "polynomial") return sample(polynomial(*fx.form), g);
  if (fx.kind == "radial") return sample(radial(fx.parameter), g);
  if (fx.kind == "one_d") return sample(one_d(fx.parameter), g);
  // height - |x|^2 / (2n) has Laplacian -1, so u - obstacle is normalized
  return ScalarField::sample(g, [&](const Point& x) { return fx.parameter - dot(x, x, n) / (2.0 * n); });
}

struct Solved {
  ScalarField field;
  ojson summary;
};

/// Solves, writing artifacts into `dir`. Returns nullopt on the iteration limit.
std::optional<Solved> solve_into(const RunConfig& config, const fs::path& dir, bool write_solution) {
  const ObstacleProblemSpec problem = build_problem(config);
  ojson summary;
  summary["method"] = method_name(config.solver.method);
  summary["tolerance"] = config.solver.tolerance;
  summary["max_iterations"] = config.solver.max_iterations;
  try {
    const SolveResult r = solve(problem, config.solver);
    std::string csv = "iteration,residual,energy\n";
    for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
      csv += std::to_string(k + 1) + "," + num(r.residual_history[k]) + "," + num(r.energy_history[k]) + "\n";
    }
    write_text(dir / "residual_history.csv", csv);
    if (write_solution) write_field(dir / "solution.obsgrid", r.solution);
    summary["converged"] = true;
    summary["iterations"] = r.iterations;
    summary["final_residual"] = r.residual_history.empty() ? 0.0 : r.residual_history.back();
    summary["energy"] = r.final_energy;
    summary["complementarity_residual"] = complementarity_residual(r.solution, problem);
    return Solved{r.solution, summary};
  } catch (const IterationLimitError& e) {
    std::string csv = "iteration,residual,energy\n";
    const auto& h = e.residual_history();
    // energies are not carried by the error; the column is left empty
    for (std::size_t k = 0; k < h.size(); ++k) csv += std::to_string(k + 1) + "," + num(h[k]) + ",\n";
    write_text(dir / "residual_history.csv", csv);
    summary["converged"] = false;
    summary["iterations"] = h.size();
    summary["final_residual"] = h.empty() ? 0.0 : h.back();
    write_json(dir / "solve.json", summary);
    std::cerr << "obslab: solver did not converge: " << e.what() << "\n";
    return std::nullopt;
  }
}

ojson check_json(const Check& c) {
  ojson j;
  j["id"] = c.id;
  j["value"] = c.value;
  j["threshold"] = c.threshold;
  j["comparison"] = c.comparison;
  j["advisory"] = c.advisory;
  j["pass"] = c.pass;
  return j;
}

Check make_check(std::string id, double value, double threshold, std::string comparison, bool advisory = false) {
  Check c{std::move(id), value, threshold, std::move(comparison), advisory, false};
  c.pass = evaluate(c);
  return c;
}

std::vector<double> linspace_radii(double r_min, double r_max, int count) {
  std::vector<double> r;
  if (r_max <= r_min) return r;
  for (int k = 0; k < count; ++k) r.push_back(r_min + (r_max - r_min) * k / (count - 1));
  return r;
}

void growth_section(const ScalarField& u, const FreeBoundarySet& fb, const GrowthOptions& o, unsigned threads,
                    const fs::path& dir, ojson& report, std::vector<Check>& checks) {
  const GridSpec& g = u.grid();
  const double h = g.spacing();
  std::vector<std::optional<GrowthReport>> out(fb.size());
  parallel_for(fb.size(), threads, [&](std::size_t k) {
    const auto radii = admissible_radii(g, fb.points[k], o.r_min_factor * h, o.r_max, o.step_factor * h);
    if (!radii.empty()) out[k] = growth_report(u, fb.points[k], radii, o.slack);
  });
  std::string csv = "point,x,y,z,radius,ratio\n";
  ojson points = ojson::array();
  double worst_lower = std::numeric_limits<double>::infinity();
  double worst_spread = 0.0;
  std::size_t skipped = 0;
  for (std::size_t k = 0; k < fb.size(); ++k) {
    if (!out[k]) {
      ++skipped;
      continue;
    }
    const GrowthReport& r = *out[k];
    for (std::size_t i = 0; i < r.radii.size(); ++i) {
      csv += std::to_string(k) + "," + point_csv(r.center) + "," + num(r.radii[i]) + "," + num(r.ratios[i]) + "\n";
    }
    ojson p;
    p["point"] = k;
    p["x"] = point_json(r.center, g.dimension());
    p["c_lower"] = r.c_lower;
    p["c_upper"] = r.c_upper;
    p["nondegenerate"] = r.nondegenerate;
    p["bounded_growth"] = r.bounded_growth;
    points.push_back(p);
    worst_lower = std::min(worst_lower, r.c_lower);
    worst_spread = std::max(worst_spread, r.c_lower > 0 ? r.c_upper / r.c_lower : std::numeric_limits<double>::max());
  }
  write_text(dir / "growth.csv", csv);
  ojson sec;
  sec["evaluated"] = fb.size() - skipped;
  sec["skipped"] = skipped;
  sec["slack"] = o.slack;
  sec["points"] = points;
  report["growth"] = sec;
  if (skipped < fb.size()) {
    const int n = g.dimension();
    checks.push_back(make_check("growth.nondegenerate", worst_lower, (1.0 - o.slack) / (2.0 * n), "ge"));
    checks.push_back(make_check("growth.bounded", worst_spread, 10.0, "le"));
  }
}

void weiss_section(const ScalarField& u, const FreeBoundarySet& fb, const WeissOptions& o, unsigned threads,
                   const fs::path& dir, ojson& report, std::vector<Check>& checks) {
  const GridSpec& g = u.grid();
  const double h = g.spacing();
  const int n = g.dimension();
  const std::vector<Point> centers = o.centers.empty() ? fb.points : o.centers;
  const WeissEvaluator eval(u);
  struct Row {
    std::vector<double> radii;
    std::optional<Profile> profile;
    std::string skip;
  };
  std::vector<Row> rows(centers.size());
  parallel_for(centers.size(), threads, [&](std::size_t k) {
    Row& row = rows[k];
    const Point& x0 = centers[k];
    const double room = g.distance_to_boundary(x0);
    if (o.radii.empty()) {
      row.radii = linspace_radii(4.0 * h, std::min(o.r_max, room), o.count);
    } else {
      for (double r : o.radii) {
        if (r <= room) row.radii.push_back(r);
      }
    }
    if (row.radii.size() < 2) {
      row.skip = "fewer than two radii fit inside the box";
      return;
    }
    try {
      Profile p;
      p.quantity = ProfileQuantity::Weiss;
      p.radii = row.radii;
      for (double r : row.radii) p.values.push_back(eval.energy(x0, r));
      p.delta = profile_tolerance(n, h, row.radii.front());
      p.verdict = check_monotone(p.radii, p.values, p.delta);
      row.profile = std::move(p);
    } catch (const Error& e) {
      row.skip = e.what();
    }
  });

  std::string csv = "point,x,y,z,radius,value,delta,non_decreasing,violation_radius,violation_amount\n";
  ojson points = ojson::array();
  std::size_t violations = 0;
  std::size_t skipped = 0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    ojson p;
    p["point"] = k;
    p["x"] = point_json(centers[k], n);
    if (!rows[k].profile) {
      ++skipped;
      p["skipped"] = rows[k].skip;
      points.push_back(p);
      continue;
    }
    const Profile& pr = *rows[k].profile;
    for (std::size_t i = 0; i < pr.radii.size(); ++i) {
      csv += std::to_string(k) + "," + point_csv(centers[k]) + "," + num(pr.radii[i]) + "," + num(pr.values[i]) + "," +
             num(pr.delta) + "," + (pr.verdict.non_decreasing ? "1" : "0") + "," + num(pr.verdict.violation_radius) +
             "," + num(pr.verdict.violation_amount) + "\n";
    }
    if (!pr.verdict.non_decreasing) ++violations;
    p["delta"] = pr.delta;
    p["non_decreasing"] = pr.verdict.non_decreasing;
    p["w_min_radius"] = pr.values.front();
    points.push_back(p);
  }
  write_text(dir / "weiss_profiles.csv", csv);
  ojson sec;
  sec["weiss_constant"] = weiss_constant(n);
  sec["evaluated"] = centers.size() - skipped;
  sec["skipped"] = skipped;
  sec["violations"] = violations;
  sec["points"] = points;
  report["weiss"] = sec;
  if (skipped < centers.size()) checks.push_back(make_check("weiss.non_decreasing", static_cast<double>(violations), 0.0, "le"));
}

void monneau_section(const ScalarField& u, const MonneauOptions& o, unsigned seed, const fs::path& dir, ojson& report,
                     std::vector<Check>& checks) {
  const GridSpec& g = u.grid();
  const int n = g.dimension();
  const double h = g.spacing();
  std::vector<std::pair<std::string, QuadraticForm>> forms;
  if (o.form) forms.emplace_back("given", *o.form);
  if (o.probes) {
    const auto probes = probe_forms(n, seed);
    for (std::size_t k = 0; k < probes.size(); ++k) forms.emplace_back("probe" + std::to_string(k), probes[k]);
  }
  std::string csv = "point,x,y,z,form,radius,value,quadrature_tolerance,delta,non_decreasing,advisory\n";
  ojson profiles = ojson::array();
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < o.centers.size(); ++k) {
    for (const auto& [label, form] : forms) {
      const Profile pr = monneau_profile(u, o.centers[k], form, o.radii, o.singular);
      for (std::size_t i = 0; i < pr.radii.size(); ++i) {
        const double qt = monneau_quadrature_tolerance(n, h, pr.radii[i]);
        csv += std::to_string(k) + "," + point_csv(o.centers[k]) + "," + label + "," + num(pr.radii[i]) + "," +
               num(pr.values[i]) + "," + num(qt) + "," + num(pr.delta) + "," + (pr.verdict.non_decreasing ? "1" : "0") +
               "," + (pr.advisory ? "1" : "0") + "\n";
        if (label == "given") worst_ratio = std::max(worst_ratio, pr.values[i] / qt);
      }
      if (!pr.verdict.non_decreasing) ++violations;
      ojson p;
      p["point"] = k;
      p["x"] = point_json(o.centers[k], n);
      p["form"] = label;
      p["non_decreasing"] = pr.verdict.non_decreasing;
      p["advisory"] = pr.advisory;
      profiles.push_back(p);
    }
  }
  write_text(dir / "monneau.csv", csv);
  ojson sec;
  sec["singular"] = o.singular;
  sec["violations"] = violations;
  sec["profiles"] = profiles;
  report["monneau"] = sec;
  checks.push_back(make_check("monneau.non_decreasing", static_cast<double>(violations), 0.0, "le", !o.singular));
  if (o.form && o.singular) {
    checks.push_back(make_check("monneau.quadrature_bound", worst_ratio, o.bound_factor, "le"));
  }
}

// Largest distance, orthogonal to ker A, from the fitted vertex to a contact
// node inside the blow-up ball. Reported without any asserted rate.
double strip_width(const ContactSet& contact, const Classification& c, const SingularPoint& s, double eigen_tol) {
  const GridSpec& g = contact.grid;
  const int n = g.dimension();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.form.matrix());
  Eigen::MatrixXd range(n, 0);
  for (int k = 0; k < n; ++k) {
    if (eig.eigenvalues()[k] >= eigen_tol) {
      range.conservativeResize(n, range.cols() + 1);
      range.col(range.cols() - 1) = eig.eigenvectors().col(k);
    }
  }
  double width = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!contact.mask[i]) continue;
    if (norm(g.coordinate(i) - c.point, n) > c.blowup_radius_used) continue;
    const Point d = g.coordinate(i) - c.fitted_center;
    Eigen::VectorXd v(n);
    for (int a = 0; a < n; ++a) v[a] = d[a];
    width = std::max(width, (range.transpose() * v).norm());
  }
  return width;
}

std::string verdict_key(const Classification& c) {
  if (c.is_regular()) return "regular";
  if (c.is_singular()) return "singular";
  return "undetermined";
}

void classify_section(const ScalarField& u, const ContactSet& contact, const FreeBoundarySet& fb,
                      const ClassifyOptions& o, unsigned threads,
                      const fs::path& dir, ojson& report, std::vector<Check>& checks) {
  const GridSpec& g = u.grid();
  const int n = g.dimension();
  FreeBoundarySet selected;
  for (std::size_t k = 0; k < fb.size(); ++k) {
    if (g.distance_to_boundary(fb.points[k]) >= o.boundary_margin_factor * g.spacing()) {
      selected.nodes.push_back(fb.nodes[k]);
      selected.points.push_back(fb.points[k]);
    }
  }
  const Stratification s = stratify(u, selected, o.classifier, threads);

  std::string csv =
      "point,x,y,z,verdict,stratum,weiss_value,regular_residual,singular_residual,blowup_radius,"
      "direction_x,direction_y,direction_z,a11,a12,a13,a22,a23,a33,strip_width,error\n";
  std::size_t matched = 0;
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const PointOutcome& out = s.points[k];
    csv += std::to_string(k) + "," + point_csv(selected.points[k]) + ",";
    if (!out.classification) {
      std::string msg = out.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      csv += "failed,,,,,,,,,,,,,,," + msg + "\n";
      continue;
    }
    const Classification& c = *out.classification;
    std::string stratum;
    std::string direction = ",,";
    std::string entries = ",,,,,";
    std::string strip;
    if (const auto* r = std::get_if<RegularPoint>(&c.verdict)) {
      direction = point_csv(r->direction);
    } else if (const auto* sp = std::get_if<SingularPoint>(&c.verdict)) {
      stratum = std::to_string(sp->stratum);
      const Eigen::MatrixXd& a = sp->form.matrix();
      auto at = [&](int i, int j) { return i < n && j < n ? num(a(i, j)) : std::string("0"); };
      entries = at(0, 0) + "," + at(0, 1) + "," + at(0, 2) + "," + at(1, 1) + "," + at(1, 2) + "," + at(2, 2);
      strip = num(strip_width(contact, c, *sp, o.classifier.eigen_tol));
    }
    csv += verdict_key(c) + "," + stratum + "," + num(c.weiss_value) + "," + num(c.regular_residual) + "," +
           num(c.singular_residual) + "," + num(c.blowup_radius_used) + "," + direction + "," + entries + "," + strip +
           ",\n";
    if (o.expect && verdict_key(c) == o.expect->verdict) {
      const auto* sp = std::get_if<SingularPoint>(&c.verdict);
      if (!o.expect->stratum || (sp && sp->stratum == *o.expect->stratum)) ++matched;
    }
  }
  write_text(dir / "classification.csv", csv);

  ojson census;
  census["total"] = s.census.total();
  census["regular"] = s.census.regular;
  ojson singular = ojson::array();
  for (std::size_t m : s.census.singular) singular.push_back(m);
  census["singular"] = singular;
  census["undetermined"] = s.census.undetermined;
  census["failed"] = s.census.failed;
  ojson sec;
  sec["points"] = selected.size();
  sec["census"] = census;
  report["classification"] = sec;
  if (o.expect) {
    const double fraction = selected.empty() ? 0.0 : static_cast<double>(matched) / static_cast<double>(selected.size());
    std::string id = "classify.fraction_" + o.expect->verdict;
    if (o.expect->stratum) id += "_m" + std::to_string(*o.expect->stratum);
    checks.push_back(make_check(id, fraction, o.expect->fraction, "ge"));
  }
}

void frequency_section(const ScalarField& u, const FrequencyOptions& o, const fs::path& dir, ojson& report,
                       std::vector<Check>& checks) {
  const int n = u.grid().dimension();
  const FrequencyEstimate f = frequency_lambda(u, o.center, o.form, o.radii);
  std::string csv = "radius,sphere_norm\n";
  for (std::size_t k = 0; k < f.radii.size(); ++k) csv += num(f.radii[k]) + "," + num(f.sphere_norms[k]) + "\n";
  write_text(dir / "frequency.csv", csv);
  ojson sec;
  sec["center"] = point_json(o.center, n);
  sec["defined"] = f.defined;
  sec["lambda"] = f.lambda;
  sec["r_squared"] = f.r_squared;
  sec["r_min"] = f.r_min;
  sec["r_max"] = f.r_max;
  report["frequency"] = sec;
  if (o.expect_defined) {
    checks.push_back(make_check("frequency.defined", f.defined ? 1.0 : 0.0, *o.expect_defined ? 1.0 : 0.0, "eq"));
  }
  if (o.expect_lambda) {
    if (!o.expect_defined) checks.push_back(make_check("frequency.defined", f.defined ? 1.0 : 0.0, 1.0, "eq"));
    checks.push_back(make_check("frequency.lambda_error", std::abs(f.lambda - *o.expect_lambda), o.tolerance, "le"));
  }
}

int diagnose_impl(const RunConfig& config, unsigned threads, bool classify_only) {
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);

  ojson report;
  report["format"] = "obslab-report";
  report["version"] = kReportVersion;
  report["command"] = classify_only ? "classify" : "diagnose";
  report["seed"] = config.seed;

  std::optional<ScalarField> u;
  if (config.solution_file) {
    if (!fs::exists(*config.solution_file)) throw ConfigError("solution file " + config.solution_file->string() + " not found");
    u = read_field(*config.solution_file);
    if (config.grid && !(u->grid() == *config.grid)) throw ConfigError("solution file grid does not match problem.grid");
    ojson s;
    s["source"] = "file";
    report["solution"] = s;
  } else {
    if (!config.grid) throw ConfigError("diagnose needs 'solution_file' or a 'problem' to solve inline");
    std::optional<Solved> solved = solve_into(config, dir, /*write_solution=*/true);
    if (!solved) return kNonConvergence;
    solved->summary["source"] = "inline";
    report["solution"] = solved->summary;
    u = std::move(solved->field);
  }
  if (!config.normalized) {
    // diagnostics act on u - obstacle
    const ScalarField psi = build_field(*config.obstacle, u->grid());
    for (std::size_t i = 0; i < u->size(); ++i) (*u)[i] -= psi[i];
  }
  const GridSpec& g = u->grid();
  report["grid"] = grid_json(g);

  const DiagnosticsOptions& d = config.diagnostics;
  const ContactSet contact = extract_contact_set(*u, d.kappa);
  const FreeBoundarySet fb = extract_free_boundary(contact);
  ojson c;
  c["kappa"] = d.kappa;
  c["threshold"] = contact.threshold;
  c["contact_nodes"] = contact.count();
  c["free_boundary_points"] = fb.size();
  report["contact"] = c;

  if (config.rasters && g.dimension() == 2) {
    write_pgm(dir / "field.pgm", *u);
    write_pgm(dir / "contact.pgm", g, contact.mask);
  }

  std::vector<Check> checks;
  if (!config.solution_file) {
    checks.push_back(make_check("solver.residual", report["solution"]["final_residual"].get<double>(),
                                config.solver.tolerance, "le"));
  }
  if (classify_only) {
    classify_section(*u, contact, fb, d.classify.value_or(ClassifyOptions{}), threads, dir, report, checks);
  } else {
    if (d.growth) growth_section(*u, fb, *d.growth, threads, dir, report, checks);
    if (d.weiss) weiss_section(*u, fb, *d.weiss, threads, dir, report, checks);
    if (d.monneau) monneau_section(*u, *d.monneau, config.seed, dir, report, checks);
    if (d.classify) classify_section(*u, contact, fb, *d.classify, threads, dir, report, checks);
    if (d.frequency) frequency_section(*u, *d.frequency, dir, report, checks);
  }

  bool pass = true;
  ojson cj = ojson::array();
  for (const Check& ch : checks) {
    cj.push_back(check_json(ch));
    if (!ch.pass && !ch.advisory) pass = false;
  }
  report["checks"] = cj;
  report["pass"] = pass;
  write_json(dir / "report.json", report);
  for (const Check& ch : checks) {
    if (!ch.pass) std::cerr << "obslab: check " << ch.id << (ch.advisory ? " (advisory)" : "") << " failed\n";
  }
  return pass ? kOk : kAcceptanceFailure;
}

}  // namespace

bool evaluate(const Check& c) {
  if (c.comparison == "le") return c.value <= c.threshold;
  if (c.comparison == "ge") return c.value >= c.threshold;
  if (c.comparison == "lt") return c.value < c.threshold;
  if (c.comparison == "gt") return c.value > c.threshold;
  if (c.comparison == "eq") return c.value == c.threshold;
  throw ConfigError("unknown comparison '" + c.comparison + "'");
}

ObstacleProblemSpec build_problem(const RunConfig& config) {
  if (!config.grid) throw ConfigError("config has no 'problem' section");
  ScalarField boundary = build_field(config.boundary, *config.grid);
  if (config.normalized) return ObstacleProblemSpec::normalized(std::move(boundary));
  return ObstacleProblemSpec::general(build_field(*config.obstacle, *config.grid), std::move(boundary));
}

int cmd_solve(const RunConfig& config, unsigned /*threads*/) {
  fs::create_directories(config.output_dir);
  const std::optional<Solved> s = solve_into(config, config.output_dir, /*write_solution=*/true);
  if (!s) return kNonConvergence;
  ojson summary = s->summary;
  summary["grid"] = grid_json(s->field.grid());
  write_json(config.output_dir / "solve.json", summary);
  return kOk;
}

int cmd_diagnose(const RunConfig& config, unsigned threads) { return diagnose_impl(config, threads, false); }

int cmd_classify(const RunConfig& config, unsigned threads) { return diagnose_impl(config, threads, true); }

int cmd_report(const RunConfig& config) {
  if (config.reports.empty()) throw ConfigError("report needs a non-empty 'reports' list");
  ojson rows = ojson::array();
  std::size_t failures = 0;
  std::size_t total = 0;
  for (const fs::path& path : config.reports) {
    const std::string label = (path.parent_path().filename() / path.filename()).string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open report " + path.string());
    ojson r;
    try {
      r = ojson::parse(in);
    } catch (const ojson::parse_error& e) {
      throw ConfigError(path.string() + ": malformed report: " + e.what());
    }
    if (!r.is_object() || r.value("format", "") != "obslab-report") throw ConfigError(path.string() + ": not an obslab report");
    if (!r.contains("version") || !r["version"].is_number_integer() || r["version"].get<int>() != kReportVersion) {
      throw ConfigError(path.string() + ": incompatible report version");
    }
    if (!r.contains("checks") || !r["checks"].is_array()) throw ConfigError(path.string() + ": report has no checks");
    for (const ojson& cj : r["checks"]) {
      Check c;
      try {
        c.id = cj.at("id").get<std::string>();
        c.value = cj.at("value").get<double>();
        c.threshold = cj.at("threshold").get<double>();
        c.comparison = cj.at("comparison").get<std::string>();
        c.advisory = cj.at("advisory").get<bool>();
        c.pass = cj.at("pass").get<bool>();
      } catch (const ojson::exception& e) {
        throw ConfigError(path.string() + ": malformed check: " + e.what());
      }
      const bool recomputed = evaluate(c);
      const bool consistent = recomputed == c.pass;
      const bool ok = recomputed && consistent;
      ++total;
      if (!ok && !c.advisory) ++failures;
      const char* tag = ok ? "PASS" : (c.advisory ? "WARN" : "FAIL");
      std::cout << tag << "  " << label << "  " << c.id << "  value=" << num(c.value) << " "
                << c.comparison << " " << num(c.threshold) << (consistent ? "" : "  (recorded flag disagrees)") << "\n";
      ojson row;
      row["report"] = label;
      row["check"] = c.id;
      row["value"] = c.value;
      row["threshold"] = c.threshold;
      row["comparison"] = c.comparison;
      row["advisory"] = c.advisory;
      row["pass"] = ok;
      rows.push_back(row);
    }
  }
  std::cout << (failures == 0 ? "all " : "") << total - failures << "/" << total << " checks passed\n";
  fs::create_directories(config.output_dir);
  ojson summary;
  summary["format"] = "obslab-summary";
  summary["version"] = kReportVersion;
  summary["checks"] = rows;
  summary["failures"] = failures;
  summary["pass"] = failures == 0;
  write_json(config.output_dir / "summary.json", summary);
  return failures == 0 ? kOk : kAcceptanceFailure;
}

int run(const std::string& verb, const fs::path& config_path, const Overrides& overrides) {
  try {
    RunConfig config = load_config(config_path);
    if (overrides.out) config.output_dir = *overrides.out;
    if (overrides.seed) config.seed = *overrides.seed;
    const unsigned threads = resolve_threads(overrides.threads);
    if (verb == "solve") return cmd_solve(config, threads);
    if (verb == "diagnose") return cmd_diagnose(config, threads);
    if (verb == "classify") return cmd_classify(config, threads);
    if (verb == "report") return cmd_report(config);
    throw ConfigError("unknown verb '" + verb + "'");
  } catch (const IterationLimitError& e) {
    std::cerr << "obslab: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "obslab: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace obslab::cli
