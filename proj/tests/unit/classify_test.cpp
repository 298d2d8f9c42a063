#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "obslab/analysis.hpp"
#include "obslab/freeboundary.hpp"
#include "obslab/solver.hpp"
#include "test_support.hpp"

namespace obslab {
namespace {

using testing::unit_cube;

double angle_degrees(const Point& a, const Point& b, int n) {
  const double c = std::clamp(dot(a, b, n) / (norm(a, n) * norm(b, n)), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

TEST(RescaleBlowup, HomogeneousFixtureIsScaleFree) {
  const GridSpec g = unit_cube(2, 129);
  const ReferenceSolution ref = polynomial(QuadraticForm::diagonal({0.7, 0.3}));
  const ScalarField u = sample(ref, g);
  for (double r : {0.2, 0.5}) {
    const BlowUp b = rescale_blowup(u, Point{}, r);
    const GridSpec& ref_grid = b.samples.grid();
    EXPECT_EQ(ref_grid.nodes(0), default_reference_nodes(2));
    double err = 0.0;
    for (std::size_t i = 0; i < ref_grid.size(); ++i) {
      if (b.in_ball[i]) err = std::max(err, std::abs(b.samples[i] - ref(ref_grid.coordinate(i))));
    }
    // multilinear interpolation of a quadratic, rescaled by r^2
    EXPECT_LE(err, g.spacing() * g.spacing() / (r * r));
  }
}

TEST(RescaleBlowup, ExactAtNodeAlignedRadii) {
  const GridSpec g = unit_cube(2, 129);
  const ScalarField u = sample(halfspace(Point{0.0, 1.0, 0.0}, 2), g);
  // reference spacing 1/16 scaled by r = 0.25 is exactly h, so every sample is a node
  const BlowUp b = rescale_blowup(u, Point{}, 0.25);
  const GridSpec& rg = b.samples.grid();
  for (std::size_t i = 0; i < rg.size(); ++i) {
    if (!b.in_ball[i]) EXPECT_EQ(b.samples[i], 0.0);
    const double t = std::max(0.0, rg.coordinate(i)[1]);
    if (b.in_ball[i]) EXPECT_NEAR(b.samples[i], 0.5 * t * t, 1e-13);
  }
}

TEST(RescaleBlowup, Errors) {
  const GridSpec g = unit_cube(2, 65);
  const ScalarField u(g);
  EXPECT_THROW(rescale_blowup(u, Point{}, 7.0 * g.spacing()), ResolutionError);
  EXPECT_THROW(rescale_blowup(u, Point{0.9, 0.0, 0.0}, 0.3), OutOfDomainError);
}

TEST(ClassifyPoint, HalfSpaceDirections) {
  const GridSpec g = unit_cube(2, 129);
  for (int k = 0; k < 8; ++k) {
    const double t = k * std::numbers::pi / 4.0 + 0.1;
    const Point e{std::cos(t), std::sin(t), 0.0};
    const Classification c = classify_point(sample(halfspace(e, 2), g), Point{});
    ASSERT_TRUE(c.is_regular()) << c.verdict_name();
    const auto& reg = std::get<RegularPoint>(c.verdict);
    EXPECT_LE(angle_degrees(reg.direction, e, 2), 2.0);
    EXPECT_NEAR(norm(reg.direction, 2), 1.0, 1e-12);
    EXPECT_LE(c.weiss_value, 0.75 * weiss_constant(2));
  }
}

TEST(ClassifyPoint, HalfSpaceThreeDimensional) {
  const GridSpec g = unit_cube(3, 33);
  const Point e{0.48, 0.6, 0.64};
  const Classification c = classify_point(sample(halfspace(e, 3), g), Point{});
  ASSERT_TRUE(c.is_regular()) << c.verdict_name();
  EXPECT_LE(angle_degrees(std::get<RegularPoint>(c.verdict).direction, e, 3), 2.0);
}

struct SingularCase {
  std::vector<double> diagonal;
  int stratum;
};

class SingularFixtures : public ::testing::TestWithParam<SingularCase> {};

TEST_P(SingularFixtures, RecoveredFormAndStratum) {
  const SingularCase sc = GetParam();
  const int n = static_cast<int>(sc.diagonal.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = sc.diagonal[i];
  const QuadraticForm form(a);
  const GridSpec g = unit_cube(n, n == 3 ? 33 : 129);
  const Classification c = classify_point(sample(polynomial(form), g), Point{});
  ASSERT_TRUE(c.is_singular()) << c.verdict_name();
  const auto& s = std::get<SingularPoint>(c.verdict);
  EXPECT_LE(s.form.frobenius_distance(form), 0.05);
  EXPECT_TRUE(s.form.is_admissible(1e-9));
  EXPECT_EQ(s.stratum, sc.stratum);
  EXPECT_GE(c.weiss_value, 0.9 * weiss_constant(n));
}

INSTANTIATE_TEST_SUITE_P(Forms, SingularFixtures,
                         ::testing::Values(SingularCase{{1.0, 0.0}, 1}, SingularCase{{0.5, 0.5}, 0},
                                           SingularCase{{0.8, 0.2}, 0}, SingularCase{{1.0}, 0},
                                           SingularCase{{1.0, 0.0, 0.0}, 2}, SingularCase{{0.5, 0.5, 0.0}, 1}),
                         [](const ::testing::TestParamInfo<SingularCase>& info) {
                           std::string name = "diag";
                           for (double d : info.param.diagonal) name += "_" + std::to_string(static_cast<int>(std::lround(10 * d)));
                           return name;
                         });

TEST(ClassifyPointProperty, StableUnderRefinement) {
  std::vector<ReferenceSolution> refs{halfspace(Point{0.6, 0.8, 0.0}, 2), polynomial(QuadraticForm::diagonal({1.0, 0.0})),
                                      polynomial(QuadraticForm::diagonal({0.8, 0.2}))};
  for (const ReferenceSolution& ref : refs) {
    const Classification coarse = classify_point(sample(ref, unit_cube(2, 65)), Point{});
    const Classification fine = classify_point(sample(ref, unit_cube(2, 129)), Point{});
    EXPECT_EQ(coarse.verdict_name(), fine.verdict_name()) << ref.name();
    if (coarse.is_singular() && fine.is_singular()) {
      const auto& a = std::get<SingularPoint>(coarse.verdict);
      const auto& b = std::get<SingularPoint>(fine.verdict);
      EXPECT_EQ(a.stratum, b.stratum);
      EXPECT_LE(a.form.frobenius_distance(b.form), 0.05);
    }
    if (coarse.is_regular() && fine.is_regular()) {
      EXPECT_LE(angle_degrees(std::get<RegularPoint>(coarse.verdict).direction,
                              std::get<RegularPoint>(fine.verdict).direction, 2),
                1.0);
    }
  }
}

TEST(ClassifierConfigTest, Validation) {
  ClassifierConfig c;
  EXPECT_NO_THROW(c.validate());
  c.blowup_factor = 4.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ClassifierConfig{};
  c.eigen_tol = -0.1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ClassifierConfig{};
  c.regular_starts = 2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Stratify, EmptyFreeBoundary) {
  const GridSpec g = unit_cube(2, 33);
  const Stratification s = stratify(ScalarField(g), FreeBoundarySet{});
  EXPECT_TRUE(s.points.empty());
  EXPECT_EQ(s.census.total(), 0u);
  EXPECT_EQ(s.census.singular_total(), 0u);
}

TEST(Stratify, SingularLineFixture) {
  const GridSpec g = unit_cube(2, 129);
  const ScalarField u = sample(polynomial(QuadraticForm::diagonal({1.0, 0.0})), g);
  FreeBoundarySet fb = extract_free_boundary(extract_contact_set(u));
  // nodes far enough from the box for a blow-up ball at 8h
  FreeBoundarySet inner;
  for (std::size_t k = 0; k < fb.size(); ++k) {
    if (g.distance_to_boundary(fb.points[k]) >= 8.0 * g.spacing()) {
      inner.nodes.push_back(fb.nodes[k]);
      inner.points.push_back(fb.points[k]);
    }
  }
  ASSERT_FALSE(inner.empty());
  const Stratification s = stratify(u, inner, ClassifierConfig{}, 4);
  EXPECT_EQ(s.census.total(), inner.size());
  ASSERT_GE(s.census.singular.size(), 2u);
  EXPECT_EQ(s.census.singular[1], inner.size());
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const PointOutcome& o = s.points[k];
    ASSERT_TRUE(o.classification.has_value()) << o.error;
    const auto& sp = std::get<SingularPoint>(o.classification->verdict);
    EXPECT_LE(sp.form.frobenius_distance(QuadraticForm::diagonal({1.0, 0.0})), 0.05);
    // the fitted form varies slowly along the singular line
    if (k > 0 && norm(inner.points[k] - inner.points[k - 1], 2) <= 1.5 * g.spacing()) {
      const auto& prev = std::get<SingularPoint>(s.points[k - 1].classification->verdict);
      EXPECT_LE(sp.form.frobenius_distance(prev.form), 0.1);
    }
  }
}

TEST(Stratify, SolvedRadialIsAllRegular) {
  const GridSpec g = unit_cube(2, 129);
  const ScalarField u = solve(ObstacleProblemSpec::normalized(sample(radial(0.4), g)), SolverConfig{}).solution;
  const FreeBoundarySet fb = extract_free_boundary(extract_contact_set(u));
  const Stratification s = stratify(u, fb, ClassifierConfig{}, 4);
  EXPECT_EQ(s.census.regular, fb.size());
  for (const PointOutcome& o : s.points) {
    ASSERT_TRUE(o.classification);
    const Classification& c = *o.classification;
    const Point inward = (-1.0 / norm(c.point, 2)) * c.point;
    // the positive phase sits outside the disc
    EXPECT_LE(angle_degrees(std::get<RegularPoint>(c.verdict).direction, -1.0 * inward, 2), 10.0);
    EXPECT_NEAR(c.weiss_value, weiss_constant(2) / 2.0, 0.1 * weiss_constant(2) / 2.0);
  }
}

TEST(Stratify, ThreadCountDoesNotChangeResults) {
  const GridSpec g = unit_cube(2, 65);
  const ScalarField u = solve(ObstacleProblemSpec::normalized(sample(radial(0.4), g)), SolverConfig{}).solution;
  const FreeBoundarySet fb = extract_free_boundary(extract_contact_set(u));
  const Stratification a = stratify(u, fb, ClassifierConfig{}, 1);
  const Stratification b = stratify(u, fb, ClassifierConfig{}, 3);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    ASSERT_TRUE(a.points[k].classification && b.points[k].classification);
    EXPECT_EQ(a.points[k].classification->weiss_value, b.points[k].classification->weiss_value);
    EXPECT_EQ(a.points[k].classification->regular_residual, b.points[k].classification->regular_residual);
  }
}

TEST(Stratify, ErrorsAreReportedPerPoint) {
  const GridSpec g = unit_cube(2, 65);
  const ScalarField u = sample(polynomial(QuadraticForm::diagonal({1.0, 0.0})), g);
  FreeBoundarySet fb;
  fb.nodes = {g.flat(NodeIndex{32, 32, 0}), g.flat(NodeIndex{32, 0, 0})};
  fb.points = {g.coordinate(fb.nodes[0]), g.coordinate(fb.nodes[1])};
  const Stratification s = stratify(u, fb);
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_TRUE(s.points[0].classification.has_value());
  EXPECT_FALSE(s.points[1].classification.has_value());
  EXPECT_FALSE(s.points[1].error.empty());
  EXPECT_EQ(s.census.failed, 1u);
}

}  // namespace
}  // namespace obslab
