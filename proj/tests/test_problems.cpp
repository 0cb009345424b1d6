#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "lsaga/assumptions.hpp"
#include "lsaga/asymptotics.hpp"
#include "lsaga/engine.hpp"
#include "lsaga/problems.hpp"
#include "lsaga/simd.hpp"

using namespace lsaga;

namespace {

Vector random_point(std::mt19937_64& rng, std::size_t d, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector x(static_cast<Eigen::Index>(d));
  for (auto& v : x) v = normal(rng);
  return x;
}

Vector fd_gradient(const FiniteSumProblem& problem, std::size_t k, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector plus = x, minus = x;
    plus(j) += h;
    minus(j) -= h;
    g(j) = (problem.component_value(k, view(plus)) - problem.component_value(k, view(minus))) /
           (2.0 * h);
  }
  return g;
}

LogisticProblem from_rows(std::initializer_list<std::initializer_list<double>> rows,
                          std::vector<double> labels) {
  Matrix w(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) w(i, j++) = v;
    ++i;
  }
  return LogisticProblem(w, std::move(labels));
}

}  // namespace

TEST_CASE("logistic helpers are overflow safe") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) == 0.0);
  CHECK(std::isfinite(softplus(800.0)));
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) == 0.0);
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("logistic Hessian examples") {
  const auto single = from_rows({{2.0, 0.0}}, {1.0});
  const Matrix h = *single.hessian(view(Vector::Zero(2).eval()));
  CHECK(h(0, 0) == 1.0);
  CHECK(h(0, 1) == 0.0);
  CHECK(h(1, 0) == 0.0);
  CHECK(h(1, 1) == 0.0);

  const auto pair = from_rows({{1.0, 0.0}, {0.0, 1.0}}, {0.0, 1.0});
  const Matrix h2 = *pair.hessian(view(Vector::Zero(2).eval()));
  CHECK(h2.isApprox(0.125 * Matrix::Identity(2, 2), 0.0));
}

TEST_CASE("logistic Hessian matches a finite-difference Jacobian") {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto problem = LogisticProblem::synthetic(30, 4, seed, 1.0);
    const Vector x = random_point(rng, 4, 1.0);
    const Matrix h = *problem.hessian(view(x));
    CHECK((h - h.transpose()).norm() == 0.0);
    CHECK(min_eigenvalue(h) >= -1e-14);
    const double step = 1e-5;
    for (Eigen::Index j = 0; j < 4; ++j) {
      Vector plus = x, minus = x;
      plus(j) += step;
      minus(j) -= step;
      const Vector column = (problem.full_gradient(plus) - problem.full_gradient(minus)) / (2 * step);
      CHECK((column - h.col(j)).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }
}

TEST_CASE("closed-form L_p") {
  const auto single = from_rows({{2.0, 0.0}}, {0.0});
  CHECK(lipschitz_constant_p(single, 1) == 4.0);
  CHECK(lipschitz_constant_p(single, 2) == 16.0);  // 256 / 16

  const auto zeros = from_rows({{0.0, 0.0}, {0.0, 0.0}}, {0.0, 1.0});
  CHECK(lipschitz_constant_p(zeros, 1) == 0.0);

  const auto quad = QuadraticProblem::random(4, 3, 1);
  for (int p = 1; p <= 5; ++p) CHECK(lipschitz_constant_p(quad, p) == 1.0);
  CHECK_THROWS_AS(lipschitz_constant_p(quad, 0), std::invalid_argument);
}

namespace {

class Opaque final : public FiniteSumProblem {
 public:
  std::size_t size() const override { return 2; }
  std::size_t dim() const override { return 1; }
  double component_value(std::size_t, std::span<const double> x) const override {
    return (x[0] - 1.0) * (x[0] - 1.0);
  }
  void component_gradient(std::size_t, std::span<const double> x,
                          std::span<double> out) const override {
    out[0] = 2.0 * (x[0] - 1.0);
  }
  std::string descriptor() const override { return "opaque"; }
};

}  // namespace

TEST_CASE("unsupported problem classes") {
  const Opaque opaque;
  CHECK_THROWS_WITH_AS(lipschitz_constant_p(opaque, 1), doctest::Contains("no closed form"),
                       std::invalid_argument);
  CHECK_THROWS_AS(solve_minimizer(opaque), NewtonError);
  CHECK_THROWS_AS(check_assumptions(opaque, {1}, 10, 1), std::invalid_argument);
  const auto report = check_assumptions(opaque, {1}, 10, 1, Vector::Ones(1));
  CHECK_FALSE(report.rho.has_value());
  CHECK_FALSE(report.flags.curvature.has_value());
}

TEST_CASE("component gradients match central finite differences") {
  std::mt19937_64 rng(77);
  const auto quad = QuadraticProblem::random(40, 6, 2, 2.0);
  const auto logit = LogisticProblem::synthetic(40, 6, 3, 1.5);
  for (const FiniteSumProblem* problem :
       {static_cast<const FiniteSumProblem*>(&quad), static_cast<const FiniteSumProblem*>(&logit)}) {
    std::uniform_int_distribution<std::size_t> pick(0, problem->size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t k = pick(rng);
      const Vector x = random_point(rng, problem->dim(), 1.0);
      const Vector g = problem->component_gradient(k, x);
      const Vector fd = fd_gradient(*problem, k, x, 1e-5);
      CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
    }
  }
}

TEST_CASE("quadratic gradient and secant identities") {
  std::mt19937_64 rng(8);
  const auto quad = QuadraticProblem::random(25, 4, 6);
  const Vector x_star = *quad.reference_minimizer();
  CHECK(quad.full_gradient(x_star).norm() <= 1e-15);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = random_point(rng, 4, 3.0);
    for (std::size_t k = 0; k < 25; ++k) {
      const Vector g = quad.component_gradient(k, x);
      for (Eigen::Index j = 0; j < 4; ++j) CHECK(g(j) == x(j) - quad.anchor(k)[j]);
    }
    const Vector delta = x - x_star;
    CHECK(delta.dot(quad.full_gradient(x)) == doctest::Approx(delta.squaredNorm()).epsilon(1e-13));
  }
  CHECK(quad.hessian(view(random_point(rng, 4, 1.0)))->isIdentity(0.0));
}

TEST_CASE("means are order independent") {
  std::mt19937_64 rng(10);
  const auto logit = LogisticProblem::synthetic(200, 8, 12, 1.0);
  std::vector<std::size_t> order(200);
  std::iota(order.begin(), order.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    const Vector x = random_point(rng, 8, 1.0);
    double value = 0.0;
    Vector grad = Vector::Zero(8);
    for (std::size_t k : order) {
      value += logit.component_value(k, view(x));
      grad += logit.component_gradient(k, x);
    }
    value /= 200.0;
    grad /= 200.0;
    CHECK(std::abs(value - logit.value(view(x))) <= 1e-12 * std::abs(value));
    CHECK((grad - logit.full_gradient(x)).norm() <= 1e-12 * std::max(1e-300, grad.norm()));
  }
}

TEST_CASE("Newton reference minimizer") {
  const auto quad = QuadraticProblem::random(10, 3, 4);
  const auto closed = solve_minimizer(quad);
  CHECK(closed.x == *quad.reference_minimizer());
  CHECK(closed.iterations == 0);

  // All labels 1 with aligned features: the infimum is approached at infinity.
  for (std::size_t d : {1u, 2u}) {
    Matrix w = Matrix::Zero(5, static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < 5; ++k) w(k, 0) = 1.0 + static_cast<double>(k);
    const LogisticProblem separable(w, std::vector<double>(5, 1.0));
    CHECK_THROWS_AS(solve_minimizer(separable), NewtonError);
    try {
      solve_minimizer(separable);
    } catch (const NewtonError& e) {
      CHECK(e.kind() != NewtonError::Kind::NoHessian);
      CHECK(std::string(e.what()).find("infinity") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(solve_minimizer(quad, 0.0), std::invalid_argument);
}

TEST_CASE("Newton agrees with a long SAGA run") {
  const auto problem = LogisticProblem::synthetic(50, 5, 2024, 1.0);
  const auto newton = solve_minimizer(problem, 1e-10);
  CHECK(newton.gradient_norm <= 1e-10);
  CHECK(problem.full_gradient(newton.x).norm() <= 1e-10);

  double l_max = 0.0;
  for (std::size_t k = 0; k < 50; ++k) l_max = std::max(l_max, 0.25 * simd::squared_norm(problem.feature(k)));
  const double gamma = 1.0 / (3.0 * l_max);
  auto state = init_state(problem, Vector::Zero(5), 99);
  for (std::uint64_t n = 1; n <= 10000000; ++n) {
    lambda_saga_step(state, problem, 1.0, gamma, state.sampler.index(n, 50));
  }
  MESSAGE("||x_newton - x_saga|| = " << (state.iterate - newton.x).norm());
  CHECK((state.iterate - newton.x).norm() <= 1e-4);
}

TEST_CASE("assumption report on the quadratic") {
  const auto quad = QuadraticProblem::random(12, 3, 9);
  const auto report = check_assumptions(quad, {1, 2, 3}, 500, 1);
  CHECK(*report.L == 1.0);
  for (const auto& lp : report.Lp) {
    CHECK(*lp.constant == 1.0);
    CHECK(lp.violations == 0);
  }
  CHECK(*report.rho == 1.0);
  CHECK(report.mu_estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.flags.equilibrium);
  CHECK(report.flags.positive_secant);
  CHECK(report.flags.lipschitz_at_optimum);
  CHECK(*report.flags.curvature);
  CHECK(report.flags.restricted_secant);
}

TEST_CASE("assumption report on logistic data") {
  const auto base = LogisticProblem::synthetic(40, 3, 21, 1.0);
  const Vector x_star = solve_minimizer(base).x;
  const auto report = check_assumptions(base, {1, 2}, 1000, 3, x_star);
  CHECK(report.flags.equilibrium);
  CHECK(report.flags.lipschitz_at_optimum);
  CHECK(report.Lp[0].violations == 0);
  CHECK(report.Lp[1].violations == 0);
  CHECK(report.mu_estimate > 0.0);
  REQUIRE(report.rho.has_value());
  const double oracle = Eigen::SelfAdjointEigenSolver<Matrix>(*base.hessian(view(x_star)))
                            .eigenvalues()
                            .minCoeff();
  CHECK(std::abs(*report.rho - oracle) <= 1e-10);

  // Scaling features by 10 and re-solving: rho is read off the new data.
  const auto big = base.scaled(10.0);
  const Vector big_star = solve_minimizer(big).x;
  const auto big_report = check_assumptions(big, {1}, 100, 3, big_star);
  const double big_oracle = Eigen::SelfAdjointEigenSolver<Matrix>(*big.hessian(view(big_star)))
                                .eigenvalues()
                                .minCoeff();
  CHECK(std::abs(*big_report.rho - big_oracle) <= 1e-10 * std::max(1.0, big_oracle));
  CHECK(*big_report.flags.curvature == (big_oracle > 0.5));

  const auto tiny = base.scaled(0.1);
  const auto tiny_report = check_assumptions(tiny, {1}, 100, 3, solve_minimizer(tiny).x);
  CHECK(*tiny_report.rho <= 0.5);
  CHECK_FALSE(*tiny_report.flags.curvature);
}

TEST_CASE("moment bounds hold over many samples") {
  const auto problem = LogisticProblem::synthetic(30, 4, 8, 1.0);
  const Vector x_star = solve_minimizer(problem).x;
  const auto report = check_assumptions(problem, {1, 2}, 10000, 17, x_star, 2.0);
  CHECK(report.Lp[0].violations == 0);
  CHECK(report.Lp[1].violations == 0);
  CHECK(report.Lp[0].worst_ratio <= 1.0);
  CHECK(report.Lp[1].worst_ratio <= 1.0);
}
