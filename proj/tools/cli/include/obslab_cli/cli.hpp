#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "obslab/analysis.hpp"
#include "obslab/fixtures.hpp"
#include "obslab/freeboundary.hpp"
#include "obslab/grid.hpp"
#include "obslab/solver.hpp"

namespace obslab::cli {

inline constexpr int kConfigVersion = 1;
inline constexpr int kReportVersion = 1;
inline constexpr unsigned kDefaultSeed = 20180611u;

enum ExitCode : int { kOk = 0, kUsage = 1, kNonConvergence = 2, kAcceptanceFailure = 3 };

/// Raised for anything wrong with a config file or a command-line value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FixtureSource {
  std::string kind;  ///< halfspace, polynomial, radial, one_d, paraboloid
  Point direction{};
  std::optional<QuadraticForm> form;
  double parameter = 0.0;  ///< contact radius for radial/one_d, height for paraboloid
};
struct FileSource {
  std::filesystem::path path;
};
struct ConstantSource {
  double value = 0.0;
};
using FieldSource = std::variant<FixtureSource, FileSource, ConstantSource>;

struct GrowthOptions {
  double r_min_factor = 4.0;  ///< smallest radius in units of h
  double r_max = 0.3;
  double step_factor = 1.0;  ///< radius step in units of h
  double slack = kDefaultNondegeneracySlack;
};

struct WeissOptions {
  /// Explicit radii; empty selects admissible radii per point.
  std::vector<double> radii;
  double r_max = 0.4;
  int count = 8;
  /// Evaluation points; empty selects the detected free boundary.
  std::vector<Point> centers;
};

struct MonneauOptions {
  std::vector<Point> centers;
  std::optional<QuadraticForm> form;
  bool probes = true;
  std::vector<double> radii;
  bool singular = false;
  double bound_factor = 5.0;
};

struct ClassifyExpectation {
  std::string verdict;  ///< regular, singular or undetermined
  std::optional<int> stratum;
  double fraction = 1.0;
};

struct ClassifyOptions {
  ClassifierConfig classifier;
  /// Optional restriction to points farther than this from the box, in units of h.
  double boundary_margin_factor = 0.0;
  std::optional<ClassifyExpectation> expect;
};

struct FrequencyOptions {
  Point center{};
  QuadraticForm form = QuadraticForm::isotropic(1);
  std::vector<double> radii;
  std::optional<double> expect_lambda;
  double tolerance = 0.05;
  std::optional<bool> expect_defined;
};

struct DiagnosticsOptions {
  double kappa = kDefaultContactKappa;
  std::optional<GrowthOptions> growth;
  std::optional<WeissOptions> weiss;
  std::optional<MonneauOptions> monneau;
  std::optional<ClassifyOptions> classify;
  std::optional<FrequencyOptions> frequency;
};

struct RunConfig {
  std::filesystem::path source;  ///< config file location; relative paths resolve against its directory
  bool normalized = true;
  std::optional<GridSpec> grid;
  FieldSource boundary = ConstantSource{};
  std::optional<FieldSource> obstacle;
  SolverConfig solver;
  std::optional<std::filesystem::path> solution_file;
  DiagnosticsOptions diagnostics;
  unsigned seed = kDefaultSeed;
  std::filesystem::path output_dir = "obslab-out";
  bool rasters = true;
  std::vector<std::filesystem::path> reports;
};

/// Parse a versioned JSON config. Throws ConfigError on malformed JSON,
/// unknown keys, missing keys, or out-of-range values.
RunConfig parse_config(const std::string& text, const std::filesystem::path& origin = {});
RunConfig load_config(const std::filesystem::path& path);

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<unsigned> seed;
  std::optional<unsigned> threads;
};

/// Worker count: --threads, else OBSLAB_THREADS, else 1. Throws ConfigError
/// on a malformed environment value.
unsigned resolve_threads(std::optional<unsigned> flag);

ObstacleProblemSpec build_problem(const RunConfig& config);

int cmd_solve(const RunConfig& config, unsigned threads);
int cmd_diagnose(const RunConfig& config, unsigned threads);
int cmd_classify(const RunConfig& config, unsigned threads);
int cmd_report(const RunConfig& config);

/// Verb dispatch with error-to-exit-code mapping and messages on stderr.
int run(const std::string& verb, const std::filesystem::path& config_path, const Overrides& overrides);

/// One acceptance check. `pass` is recomputed from the other fields by
/// `evaluate`; advisory checks never fail a run.
struct Check {
  std::string id;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparison;  ///< le, ge, lt, gt, eq
  bool advisory = false;
  bool pass = false;
};

/// Throws ConfigError on an unknown comparison.
bool evaluate(const Check& check);

}  // namespace obslab::cli
