#include "obslab/fixtures.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace obslab {

QuadraticForm::QuadraticForm(Eigen::MatrixXd a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1 || a_.rows() > kMaxDimension) {
    throw std::invalid_argument("quadratic form must be a square matrix of size 1, 2 or 3");
  }
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (a_(i, j) != a_(j, i)) throw std::invalid_argument("quadratic form must be symmetric");
    }
  }
  if (!a_.allFinite()) throw std::invalid_argument("quadratic form entries must be finite");
}

QuadraticForm QuadraticForm::diagonal(std::initializer_list<double> entries) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) d(i++) = e;
  return QuadraticForm(d.asDiagonal().toDenseMatrix());
}

QuadraticForm QuadraticForm::isotropic(int dimension) {
  return QuadraticForm(Eigen::MatrixXd::Identity(dimension, dimension) / dimension);
}

QuadraticForm QuadraticForm::rank_one(const Point& direction, int dimension) {
  const double len = norm(direction, dimension);
  if (std::abs(len - 1.0) > 1e-12) throw NormalizationError("rank-one form needs a unit direction");
  Eigen::VectorXd e(dimension);
  for (int i = 0; i < dimension; ++i) e(i) = direction[i];
  Eigen::MatrixXd a = e * e.transpose();
  a = 0.5 * (a + a.transpose()).eval();
  return QuadraticForm(a);
}

Eigen::VectorXd QuadraticForm::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double QuadraticForm::operator()(const Point& x) const {
  const int n = dimension();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s += a_(i, j) * x[i] * x[j];
  }
  return 0.5 * s;
}

bool QuadraticForm::is_admissible(double tol) const {
  return eigenvalues().minCoeff() >= -tol && std::abs(trace() - 1.0) <= tol;
}

QuadraticForm QuadraticForm::project_admissible() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_);
  Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
  const double t = lambda.sum();
  if (!(t > 0.0)) throw MembershipError("form has no positive eigenvalue; cannot project onto the class");
  lambda /= t;
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd p = v * lambda.asDiagonal() * v.transpose();
  p = 0.5 * (p + p.transpose()).eval();
  return QuadraticForm(p);
}

int QuadraticForm::kernel_dimension(double eigen_tol) const {
  const Eigen::VectorXd lambda = eigenvalues();
  int m = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) m += lambda(i) < eigen_tol ? 1 : 0;
  return m;
}

double QuadraticForm::frobenius_distance(const QuadraticForm& other) const {
  if (other.dimension() != dimension()) throw std::invalid_argument("form dimensions differ");
  return (a_ - other.a_).norm();
}

std::vector<QuadraticForm> probe_forms(int dimension, unsigned seed) {
  std::vector<QuadraticForm> forms;
  forms.push_back(QuadraticForm::isotropic(dimension));
  Point e1{1.0, 0.0, 0.0};
  forms.push_back(QuadraticForm::rank_one(e1, dimension));
  Point diag{0.0, 0.0, 0.0};
  for (int i = 0; i < dimension; ++i) diag[i] = 1.0 / std::sqrt(static_cast<double>(dimension));
  forms.push_back(QuadraticForm::rank_one(diag, dimension));

  // Raw engine output keeps the draws identical across standard libraries.
  std::mt19937 rng(seed);
  auto uniform = [&rng] { return 2.0 * (static_cast<double>(rng()) / 4294967296.0) - 1.0; };
  for (int k = 0; k < 2; ++k) {
    Eigen::MatrixXd b(dimension, dimension);
    for (int i = 0; i < dimension; ++i) {
      for (int j = 0; j < dimension; ++j) b(i, j) = uniform();
    }
    Eigen::MatrixXd a = b * b.transpose();
    a /= a.trace();
    a = 0.5 * (a + a.transpose()).eval();
    forms.emplace_back(a);
  }
  return forms;
}

ReferenceSolution halfspace(const Point& direction, int dimension) {
  if (dimension < 1 || dimension > kMaxDimension) throw std::invalid_argument("dimension must be 1, 2 or 3");
  const double len = norm(direction, dimension);
  if (std::abs(len - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "half-space direction must be a unit vector (|e| = " << len << ")";
    throw NormalizationError(msg.str());
  }
  Point e{0.0, 0.0, 0.0};
  for (int i = 0; i < dimension; ++i) e[i] = direction[i];
  return ReferenceSolution(dimension, HalfSpaceSolution{e});
}

ReferenceSolution polynomial(const QuadraticForm& form) {
  if (!form.is_admissible()) {
    throw MembershipError("polynomial fixture needs a symmetric nonnegative form with unit trace");
  }
  return ReferenceSolution(form.dimension(), PolynomialSolution{form});
}

ReferenceSolution radial(double contact_radius) {
  if (!(contact_radius > 0.0) || !std::isfinite(contact_radius)) {
    throw DomainError("radial contact radius must be positive");
  }
  return ReferenceSolution(2, RadialSolution{contact_radius});
}

ReferenceSolution one_d(double contact_halfwidth) {
  if (!(contact_halfwidth > 0.0) || !std::isfinite(contact_halfwidth)) {
    throw DomainError("one-dimensional contact half-width must be positive");
  }
  return ReferenceSolution(1, OneDSolution{contact_halfwidth});
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string ReferenceSolution::name() const {
  return std::visit(Overloaded{[](const HalfSpaceSolution&) { return std::string("halfspace"); },
                               [](const PolynomialSolution&) { return std::string("polynomial"); },
                               [](const RadialSolution&) { return std::string("radial"); },
                               [](const OneDSolution&) { return std::string("one_d"); }},
                    kind_);
}

double ReferenceSolution::operator()(const Point& x) const {
  const int n = dimension_;
  return std::visit(Overloaded{[&](const HalfSpaceSolution& s) {
                                 const double t = std::max(0.0, dot(s.direction, x, n));
                                 return 0.5 * t * t;
                               },
                               [&](const PolynomialSolution& s) { return std::max(0.0, s.form(x)); },
                               [&](const RadialSolution& s) {
                                 const double a = s.contact_radius;
                                 const double rho = norm(x, 2);
                                 if (rho <= a) return 0.0;
                                 const double v = 0.25 * (rho * rho - a * a) - 0.5 * a * a * std::log(rho / a);
                                 return std::max(0.0, v);
                               },
                               [&](const OneDSolution& s) {
                                 const double t = std::max(0.0, std::abs(x[0]) - s.contact_halfwidth);
                                 return 0.5 * t * t;
                               }},
                    kind_);
}

bool ReferenceSolution::in_contact(const Point& x) const {
  const int n = dimension_;
  return std::visit(Overloaded{[&](const HalfSpaceSolution& s) { return dot(s.direction, x, n) <= 0.0; },
                               [&](const PolynomialSolution& s) { return s.form(x) <= 0.0; },
                               [&](const RadialSolution& s) { return norm(x, 2) <= s.contact_radius; },
                               [&](const OneDSolution& s) { return std::abs(x[0]) <= s.contact_halfwidth; }},
                    kind_);
}

ScalarField sample(const ReferenceSolution& ref, const GridSpec& grid) {
  if (grid.dimension() != ref.dimension()) throw GridMismatchError("fixture and grid dimensions differ");
  double half_width = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid.dimension(); ++a) {
    half_width = std::min(half_width, 0.5 * (grid.upper(a) - grid.lower(a)));
  }
  if (const auto* r = std::get_if<RadialSolution>(&ref.kind()); r && r->contact_radius >= half_width) {
    throw DomainError("radial contact radius must be below the box half-width");
  }
  if (const auto* o = std::get_if<OneDSolution>(&ref.kind()); o && o->contact_halfwidth >= half_width) {
    throw DomainError("one-dimensional contact half-width must be below the box half-width");
  }
  return ScalarField::sample(grid, [&ref](const Point& x) { return ref(x); });
}

}  // namespace obslab
