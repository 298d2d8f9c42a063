#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "obslab/blowup.hpp"
#include "obslab/monotonicity.hpp"

namespace obslab {

namespace {

constexpr double kGoldenRatio = 0.6180339887498949;
constexpr double kTiny = 1e-300;
// Offset accuracy while ranking starting directions.
constexpr double kSeedTolerance = 1e-3;

template <class F>
std::pair<double, double> golden_minimise(F&& f, double a, double b, double tol) {
  double c = b - kGoldenRatio * (b - a);
  double d = a + kGoldenRatio * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGoldenRatio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGoldenRatio * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Samples of the blow-up inside the unit ball.
struct FitData {
  int dimension = 0;
  std::vector<Point> y;
  std::vector<double> b;
  double norm2 = 0.0;
};

FitData fit_data(const BlowUp& blow) {
  FitData d;
  const GridSpec& g = blow.samples.grid();
  d.dimension = g.dimension();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!blow.in_ball[i]) continue;
    d.y.push_back(g.coordinate(i));
    d.b.push_back(blow.samples[i]);
    d.norm2 += blow.samples[i] * blow.samples[i];
  }
  return d;
}

struct RegularFit {
  Point direction{};
  double offset = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

class RegularFitter {
 public:
  RegularFitter(const FitData& data, const ClassifierConfig& config) : data_(data), config_(config) {}

  double sse(const Point& e, double s) const {
    project(e);
    return sse_projected(s);
  }

  RegularFit best_offset(const Point& e, double tol = 1e-7) const {
    project(e);
    const double limit = config_.offset_limit;
    auto f = [&](double s) { return sse_projected(s); };
    auto [s, v] = golden_minimise(f, -limit, limit, tol);
    for (double edge : {-limit, limit}) {
      const double fe = f(edge);
      if (fe < v) {
        v = fe;
        s = edge;
      }
    }
    return {e, s, v};
  }

  RegularFit fit() const {
    switch (data_.dimension) {
      case 1: return fit_line();
      case 2: return fit_plane();
      default: return fit_space();
    }
  }

 private:
  RegularFit fit_line() const {
    const RegularFit a = best_offset(Point{1.0, 0.0, 0.0});
    const RegularFit b = best_offset(Point{-1.0, 0.0, 0.0});
    return a.sse <= b.sse ? a : b;
  }

  RegularFit fit_plane() const {
    const int starts = config_.regular_starts;
    const double step = 2.0 * std::numbers::pi / starts;
    auto dir = [](double theta) { return Point{std::cos(theta), std::sin(theta), 0.0}; };
    std::vector<std::pair<double, double>> seeds;
    for (int k = 0; k < starts; ++k) {
      const double theta = k * step;
      seeds.emplace_back(best_offset(dir(theta), kSeedTolerance).sse, theta);
    }
    std::sort(seeds.begin(), seeds.end());
    RegularFit best;
    const std::size_t refine = std::min<std::size_t>(2, seeds.size());
    for (std::size_t k = 0; k < refine; ++k) {
      const double t0 = seeds[k].second;
      auto f = [&](double theta) { return best_offset(dir(theta)).sse; };
      const auto [theta, v] = golden_minimise(f, t0 - step, t0 + step, 1e-7);
      if (v < best.sse) best = best_offset(dir(theta));
    }
    return best;
  }

  RegularFit fit_space() const {
    const int starts = config_.regular_starts;
    std::vector<std::pair<double, Point>> seeds;
    // Fibonacci lattice on the sphere.
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < starts; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / starts;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = k * golden_angle;
      const Point e{rho * std::cos(phi), rho * std::sin(phi), z};
      seeds.emplace_back(best_offset(e, kSeedTolerance).sse, e);
    }
    std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const double width = std::sqrt(4.0 * std::numbers::pi / starts);
    RegularFit best;
    const std::size_t refine = std::min<std::size_t>(2, seeds.size());
    for (std::size_t k = 0; k < refine; ++k) {
      Point e = seeds[k].second;
      double radius = width;
      for (int round = 0; round < 6; ++round) {
        const auto [t1, t2] = tangent_basis(e);
        for (const Point& t : {t1, t2}) {
          auto along = [&](double a) { return normalised(e + a * t); };
          auto f = [&](double a) { return best_offset(along(a)).sse; };
          const double a = golden_minimise(f, -radius, radius, 1e-7).first;
          e = along(a);
        }
        radius *= 0.5;
      }
      const RegularFit cand = best_offset(e);
      if (cand.sse < best.sse) best = cand;
    }
    return best;
  }

  static Point normalised(const Point& p) {
    const double l = norm(p, 3);
    return (1.0 / l) * p;
  }

  static std::pair<Point, Point> tangent_basis(const Point& e) {
    const Point helper = std::abs(e[0]) < 0.9 ? Point{1.0, 0.0, 0.0} : Point{0.0, 1.0, 0.0};
    const double d = dot(helper, e, 3);
    const Point t1 = normalised(helper - d * e);
    const Point t2{e[1] * t1[2] - e[2] * t1[1], e[2] * t1[0] - e[0] * t1[2], e[0] * t1[1] - e[1] * t1[0]};
    return {t1, t2};
  }

  void project(const Point& e) const {
    const int n = data_.dimension;
    projections_.resize(data_.y.size());
    for (std::size_t k = 0; k < data_.y.size(); ++k) projections_[k] = dot(e, data_.y[k], n);
  }

  double sse_projected(double s) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < projections_.size(); ++k) {
      const double t = std::max(0.0, projections_[k] + s);
      const double r = 0.5 * t * t - data_.b[k];
      acc += r * r;
    }
    return acc;
  }

  const FitData& data_;
  const ClassifierConfig& config_;
  mutable std::vector<double> projections_;
};

struct SingularFit {
  std::optional<QuadraticForm> form;
  Eigen::VectorXd linear;
  double constant = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

SingularFit fit_singular(const FitData& data) {
  const int n = data.dimension;
  const int quad_terms = n * (n + 1) / 2;
  const int cols = quad_terms + n + 1;
  const auto rows = static_cast<Eigen::Index>(data.y.size());
  Eigen::MatrixXd m(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Point& y = data.y[static_cast<std::size_t>(k)];
    int c = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) m(k, c++) = i == j ? 0.5 * y[i] * y[i] : y[i] * y[j];
    }
    for (int i = 0; i < n; ++i) m(k, c++) = y[i];
    m(k, c) = 1.0;
    rhs(k) = data.b[static_cast<std::size_t>(k)];
  }
  const Eigen::VectorXd coef = m.colPivHouseholderQr().solve(rhs);
  Eigen::MatrixXd a(n, n);
  int c = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      a(i, j) = coef(c);
      a(j, i) = coef(c);
      ++c;
    }
  }

  SingularFit fit;
  try {
    fit.form = QuadraticForm(a).project_admissible();
  } catch (const MembershipError&) {
    return fit;
  }

  // Refit the affine part against the projected form.
  Eigen::MatrixXd affine(rows, n + 1);
  Eigen::VectorXd rest(rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Point& y = data.y[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) affine(k, i) = y[i];
    affine(k, n) = 1.0;
    rest(k) = rhs(k) - (*fit.form)(y);
  }
  const Eigen::VectorXd lin = affine.colPivHouseholderQr().solve(rest);
  fit.linear = lin.head(n);
  fit.constant = lin(n);
  fit.sse = (affine * lin - rest).squaredNorm();
  return fit;
}

// Minimiser of 1/2 <Ay,y> + g.y restricted to the range of A.
std::optional<Point> singular_vertex(const QuadraticForm& form, const Eigen::VectorXd& g, double eigen_tol) {
  const int n = form.dimension();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form.matrix());
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    const double lambda = es.eigenvalues()(k);
    if (lambda < eigen_tol) continue;
    const Eigen::VectorXd v = es.eigenvectors().col(k);
    y -= (v.dot(g) / lambda) * v;
  }
  if (y.norm() > 1.0) return std::nullopt;
  Point p{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) p[i] = y(i);
  return p;
}

double weiss_at(const WeissEvaluator& weiss, const Point& preferred, const Point& fallback, double r) {
  try {
    return weiss.energy(preferred, r);
  } catch (const OutOfDomainError&) {
    return weiss.energy(fallback, r);
  }
}

Classification classify_with(const WeissEvaluator& weiss, const Point& x0, const ClassifierConfig& config) {
  config.validate();
  const ScalarField& field = weiss.field();
  const GridSpec& g = field.grid();
  const int n = g.dimension();
  const double r = config.blowup_radius.value_or(config.blowup_factor * g.spacing());
  const BlowUp blow = rescale_blowup(field, x0, r, config.reference_nodes);
  const FitData data = fit_data(blow);

  Classification out;
  out.point = x0;
  out.blowup_radius_used = r;
  out.fitted_center = x0;
  const double c_n = weiss_constant(n);

  if (!(data.norm2 > kTiny)) {
    out.verdict = UndeterminedPoint{"blow-up vanishes identically"};
    out.weiss_value = weiss.energy(x0, r);
    out.regular_residual = out.singular_residual = std::numeric_limits<double>::infinity();
    return out;
  }

  const RegularFit reg = RegularFitter(data, config).fit();
  const SingularFit sing = fit_singular(data);
  const double scale = std::sqrt(data.norm2);
  out.regular_residual = std::sqrt(reg.sse) / scale;
  out.singular_residual = std::sqrt(sing.sse) / scale;

  const bool regular_better = out.regular_residual <= out.singular_residual;
  Point offset{0.0, 0.0, 0.0};
  if (regular_better) {
    offset = (-reg.offset) * reg.direction;
  } else if (sing.form) {
    offset = singular_vertex(*sing.form, sing.linear, config.eigen_tol).value_or(Point{0.0, 0.0, 0.0});
  }
  out.fitted_center = x0 + r * offset;
  out.weiss_value = weiss_at(weiss, out.fitted_center, x0, r);

  auto make_regular = [&] { return RegularPoint{reg.direction, out.regular_residual}; };
  auto make_singular = [&]() -> decltype(out.verdict) {
    if (!sing.form) return UndeterminedPoint{"polynomial fit has no admissible projection"};
    return SingularPoint{*sing.form, sing.form->kernel_dimension(config.eigen_tol), out.singular_residual};
  };

  const double gap = out.regular_residual - out.singular_residual;
  if (std::abs(gap) >= config.residual_margin) {
    out.verdict = gap < 0.0 ? decltype(out.verdict){make_regular()} : make_singular();
    return out;
  }
  const double w = out.weiss_value;
  if (std::abs(w - 0.75 * c_n) < config.weiss_margin * c_n) {
    std::ostringstream msg;
    msg << "fit residuals tie (" << out.regular_residual << " vs " << out.singular_residual
        << ") and Weiss value " << w << " is near 3c_n/4";
    out.verdict = UndeterminedPoint{msg.str()};
  } else if (std::abs(w - 0.5 * c_n) < std::abs(w - c_n)) {
    out.verdict = make_regular();
  } else {
    out.verdict = make_singular();
  }
  return out;
}

}  // namespace

std::size_t default_reference_nodes(int dimension) {
  switch (dimension) {
    case 1: return 129;
    case 2: return 33;
    default: return 17;
  }
}

BlowUp rescale_blowup(const ScalarField& field, const Point& x0, double r, std::size_t reference_nodes) {
  const GridSpec& g = field.grid();
  const int n = g.dimension();
  if (r < 8.0 * g.spacing() * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "blow-up radius " << r << " is below 8h = " << 8.0 * g.spacing();
    throw ResolutionError(msg.str());
  }
  require_inside(g, Ball{x0, r});
  const std::size_t m = reference_nodes == 0 ? default_reference_nodes(n) : reference_nodes;
  const GridSpec ref = GridSpec::cube(n, -1.0, 1.0, m);
  std::vector<double> values(ref.size(), 0.0);
  std::vector<bool> inside(ref.size(), false);
  const double inv_r2 = 1.0 / (r * r);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const Point y = ref.coordinate(i);
    if (dot(y, y, n) > 1.0 + 1e-12) continue;
    inside[i] = true;
    values[i] = interpolate(field, x0 + r * y) * inv_r2;
  }
  return BlowUp{ScalarField(ref, std::move(values)), std::move(inside), x0, r};
}

void ClassifierConfig::validate() const {
  if (blowup_radius && !(*blowup_radius > 0.0)) throw std::invalid_argument("blow-up radius must be positive");
  if (!(blowup_factor >= 8.0)) throw std::invalid_argument("blow-up factor must be at least 8");
  if (regular_starts < 4) throw std::invalid_argument("regular fit needs at least 4 starting directions");
  if (!(offset_limit >= 0.0 && offset_limit < 1.0)) throw std::invalid_argument("offset limit must be in [0, 1)");
  if (!(eigen_tol > 0.0 && eigen_tol < 1.0)) throw std::invalid_argument("eigen_tol must be in (0, 1)");
  if (!(residual_margin >= 0.0)) throw std::invalid_argument("residual margin must be nonnegative");
  if (!(weiss_margin >= 0.0 && weiss_margin < 0.25)) throw std::invalid_argument("Weiss margin must be in [0, 1/4)");
  if (reference_nodes != 0 && (reference_nodes < 9 || reference_nodes % 2 == 0)) {
    throw std::invalid_argument("reference grid needs an odd node count of at least 9");
  }
}

std::string Classification::verdict_name() const {
  if (is_regular()) return "regular";
  if (is_singular()) return "singular";
  return "undetermined";
}

Classification classify_point(const ScalarField& field, const Point& x0, const ClassifierConfig& config) {
  return classify_with(WeissEvaluator(field), x0, config);
}

std::size_t StratumCensus::total() const { return regular + undetermined + failed + singular_total(); }

std::size_t StratumCensus::singular_total() const {
  std::size_t s = 0;
  for (std::size_t c : singular) s += c;
  return s;
}

Stratification stratify(const ScalarField& field, const FreeBoundarySet& fb, const ClassifierConfig& config,
                        unsigned threads) {
  config.validate();
  const int n = field.grid().dimension();
  Stratification out;
  out.census.singular.assign(static_cast<std::size_t>(n), 0);
  out.points.resize(fb.size());
  if (fb.empty()) return out;

  const WeissEvaluator weiss(field);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < fb.size(); k = next++) {
      try {
        out.points[k].classification = classify_with(weiss, fb.points[k], config);
      } catch (const Error& e) {
        out.points[k].error = e.what();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(fb.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& p : out.points) {
    if (!p.classification) {
      ++out.census.failed;
    } else if (const auto* s = std::get_if<SingularPoint>(&p.classification->verdict)) {
      ++out.census.singular[static_cast<std::size_t>(std::clamp(s->stratum, 0, n - 1))];
    } else if (p.classification->is_regular()) {
      ++out.census.regular;
    } else {
      ++out.census.undetermined;
    }
  }
  return out;
}

}  // namespace obslab
