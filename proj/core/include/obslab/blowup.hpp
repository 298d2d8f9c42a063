#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "obslab/fixtures.hpp"
#include "obslab/freeboundary.hpp"
#include "obslab/grid.hpp"

namespace obslab {

/// u(x0 + r y) / r^2 sampled on a fixed grid over [-1,1]^n and masked to
/// the closed unit ball.
struct BlowUp {
  ScalarField samples;
  std::vector<bool> in_ball;
  Point center{};
  double radius = 0.0;
};

/// Default reference-grid resolution per axis: 129 (1D), 33 (2D), 17 (3D).
std::size_t default_reference_nodes(int dimension);

/// Throws ResolutionError for r < 8h and OutOfDomainError when B_r(x0) leaves
/// the box. `reference_nodes` = 0 selects the default.
BlowUp rescale_blowup(const ScalarField& field, const Point& x0, double r, std::size_t reference_nodes = 0);

struct ClassifierConfig {
  /// Blow-up radius in units of h when `blowup_radius` is unset.
  double blowup_factor = 8.0;
  std::optional<double> blowup_radius;
  std::size_t reference_nodes = 0;
  int regular_starts = 64;
  /// Largest admissible shift of the half-space model, in blow-up units.
  double offset_limit = 0.5;
  double eigen_tol = 0.05;
  /// Normalised-residual gap below which the fits are considered tied.
  double residual_margin = 0.02;
  /// Half-width, relative to c_n, of the Weiss band around 3 c_n / 4 in
  /// which a tie is reported as Undetermined.
  double weiss_margin = 0.05;

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

struct RegularPoint {
  Point direction{};
  double fit_residual = 0.0;
};

struct SingularPoint {
  QuadraticForm form;
  int stratum = 0;
  double fit_residual = 0.0;
};

struct UndeterminedPoint {
  std::string reason;
};

struct Classification {
  Point point{};
  std::variant<RegularPoint, SingularPoint, UndeterminedPoint> verdict;
  double weiss_value = 0.0;
  double blowup_radius_used = 0.0;
  /// Normalised residuals of both model fits, for reporting.
  double regular_residual = 0.0;
  double singular_residual = 0.0;
  /// Free-boundary location implied by the winning fit.
  Point fitted_center{};

  bool is_regular() const { return std::holds_alternative<RegularPoint>(verdict); }
  bool is_singular() const { return std::holds_alternative<SingularPoint>(verdict); }
  bool is_undetermined() const { return std::holds_alternative<UndeterminedPoint>(verdict); }
  std::string verdict_name() const;
};

/// Regular-vs-singular model fit at x0.
///
/// Both models carry a small translation: the half-space model is
/// 1/2 [(e.y + s)_+]^2 with |s| <= offset_limit, the polynomial model is
/// 1/2 <Ay, y> + g.y + c. A is projected onto the blow-up class before its
/// residual is measured. Throws ResolutionError / OutOfDomainError via
/// rescale_blowup.
Classification classify_point(const ScalarField& field, const Point& x0, const ClassifierConfig& config = {});

struct StratumCensus {
  std::size_t regular = 0;
  std::size_t undetermined = 0;
  std::size_t failed = 0;
  /// singular[m] = number of singular points with kernel dimension m.
  std::vector<std::size_t> singular;

  std::size_t total() const;
  std::size_t singular_total() const;
};

struct PointOutcome {
  std::optional<Classification> classification;
  std::string error;  ///< non-empty when classification raised
};

struct Stratification {
  std::vector<PointOutcome> points;
  StratumCensus census;
};

/// classify_point over every free-boundary point, in parallel over
/// `threads` workers. Results keep the order of `fb`.
Stratification stratify(const ScalarField& field, const FreeBoundarySet& fb, const ClassifierConfig& config = {},
                        unsigned threads = 1);

}  // namespace obslab
