#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>
#include <random>

#include "lsaga/engine.hpp"

using namespace lsaga;

namespace {

// Scalar quadratic with anchors (1, -1), so x* = 0.
QuadraticProblem scalar_pair() {
  Matrix anchors(2, 1);
  anchors << 1.0, -1.0;
  return QuadraticProblem(anchors);
}

Vector scalar(double v) {
  Vector x(1);
  x << v;
  return x;
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Vector random_point(std::mt19937_64& rng, std::size_t d, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector x(static_cast<Eigen::Index>(d));
  for (auto& v : x) v = normal(rng);
  return x;
}

}  // namespace

TEST_CASE("init_state fills the table at x0") {
  const auto problem = scalar_pair();
  const auto state = init_state(problem, scalar(2.0), 1);
  CHECK(state.table.row(0)[0] == 1.0);
  CHECK(state.table.row(1)[0] == 3.0);
  CHECK(state.table.mean()[0] == 2.0);
  CHECK(state.n == 1);
  CHECK(state.iterate(0) == 2.0);

  const auto at_opt = init_state(problem, scalar(0.0), 1);
  CHECK(at_opt.table.row(0)[0] == -1.0);
  CHECK(at_opt.table.row(1)[0] == 1.0);
  CHECK(at_opt.table.mean()[0] == 0.0);

  const auto split = init_state(problem, scalar(2.0), scalar(-5.0), 1);
  CHECK(split.iterate(0) == -5.0);
  CHECK(split.table.mean()[0] == 2.0);

  CHECK_THROWS_AS(init_state(problem, scalar(2.0), Vector::Zero(2), 1), std::invalid_argument);
  CHECK_THROWS_AS(init_state(problem, Vector::Zero(3), scalar(1.0), 1), std::invalid_argument);
}

TEST_CASE("single lambda-SAGA steps match hand evaluation") {
  const auto problem = scalar_pair();
  // Rows (1, 3), mean 2, X = 2, gamma = 1, k = first component.
  auto s = init_state(problem, scalar(2.0), 1);
  lambda_saga_step(s, problem, 1.0, 1.0, 0);
  CHECK(s.iterate(0) == 0.0);  // 2 - (1 - (1 - 2))
  CHECK(s.n == 2);
  CHECK(s.table.row(0)[0] == 1.0);  // grad at the old iterate, 2 - 1
  CHECK(s.table.row(1)[0] == 3.0);

  s = init_state(problem, scalar(2.0), 1);
  lambda_saga_step(s, problem, 0.0, 1.0, 0);
  CHECK(s.iterate(0) == 1.0);

  s = init_state(problem, scalar(2.0), 1);
  lambda_saga_step(s, problem, 0.5, 1.0, 0);
  CHECK(s.iterate(0) == 0.5);

  CHECK_THROWS_AS(lambda_saga_step(s, problem, 0.5, 1.0, 2), std::out_of_range);
  CHECK_THROWS_AS(lambda_saga_step(s, problem, 1.5, 1.0, 0), std::invalid_argument);
}

TEST_CASE("table row refresh uses the pre-update iterate") {
  const auto problem = QuadraticProblem::random(7, 3, 5);
  std::mt19937_64 rng(9);
  auto state = init_state(problem, random_point(rng, 3, 1.0), 3);
  for (int i = 0; i < 50; ++i) {
    const Vector before = state.iterate;
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < 7; ++k) {
      rows.emplace_back(state.table.row(k).begin(), state.table.row(k).end());
    }
    const std::size_t k = lambda_saga_step(state, problem, 0.7, StepSchedule::create(1.0, 1.0));
    const Vector expected = problem.component_gradient(k, before);
    for (std::size_t j = 0; j < 3; ++j) CHECK(state.table.row(k)[j] == expected(j));
    for (std::size_t other = 0; other < 7; ++other) {
      if (other == k) continue;
      for (std::size_t j = 0; j < 3; ++j) CHECK(state.table.row(other)[j] == rows[other][j]);
    }
  }
}

TEST_CASE("incremental mean drift stays bounded") {
  const auto problem = QuadraticProblem::random(50, 5, 17, 3.0);
  std::mt19937_64 rng(21);
  GradientTable table(problem, view(random_point(rng, 5, 2.0)), GradientTable::kNeverResync);
  std::uniform_int_distribution<std::size_t> pick(0, 49);
  Vector x(5), row(5);
  for (int i = 0; i < 1000000; ++i) {
    x = random_point(rng, 5, 2.0);
    const std::size_t k = pick(rng);
    problem.component_gradient(k, view(x), view(row));
    table.replace(k, view(row));
  }
  const double drift = (table.mean_vector() - table.recomputed_mean()).norm();
  MESSAGE("drift after 1e6 updates: " << drift);
  CHECK(drift <= 1e-8);
  table.resync();
  CHECK((table.mean_vector() - table.recomputed_mean()).norm() <= 1e-15);
}

TEST_CASE("periodic resync keeps the mean on the recomputed value") {
  const auto problem = QuadraticProblem::random(10, 4, 3);
  auto state = init_state(problem, Vector::Zero(4), 11);
  const auto schedule = StepSchedule::create(1.0, 1.0);
  for (int i = 0; i < 10 * 37; ++i) lambda_saga_step(state, problem, 1.0, schedule);
  // 370 replacements = 37 full periods of N = 10.
  CHECK(same_bits(state.table.mean_vector(), state.table.recomputed_mean()));
}

TEST_CASE("diagnostics on the scalar example") {
  const auto problem = scalar_pair();
  const ReferencePoint ref(problem, scalar(0.0));
  CHECK(ref.theta() == 1.0);
  CHECK(ref.value() == 0.5);

  auto state = init_state(problem, scalar(2.0), 1);
  const auto unit = StepSchedule::create(1.0, 1.0);
  auto snap = diagnostics(state, problem, ref, unit);
  CHECK(snap.V == 4.0);
  CHECK(snap.tau2 == 4.0);
  CHECK(snap.A == 4.0);  // ((1 - (-1))^2 + (3 - 1)^2) / 2
  CHECK(snap.grad_eval_norm == 2.0);
  CHECK(snap.value_gap == doctest::Approx(2.0));  // (1 + 9)/4 - 1/2

  state.n = 2;  // gamma_{n-1} = gamma_1 = 1
  snap = diagnostics(state, problem, ref, unit);
  CHECK(snap.T == 28.0);  // 4 + 3*2*1*4
  CHECK(snap.T >= snap.V);

  const auto at_opt = init_state(problem, scalar(0.0), 1);
  snap = diagnostics(at_opt, problem, ref, unit);
  CHECK(snap.V == 0.0);
  CHECK(snap.A == 0.0);
  CHECK(snap.tau2 == 0.0);
  CHECK(snap.grad_eval_norm == 0.0);

  const auto m = moment_diagnostics(init_state(problem, scalar(2.0), 1), problem, ref, 2);
  CHECK(m.A == 16.0);    // (4^2 + 4^2) / 2
  CHECK(m.tau == 16.0);
  CHECK(m.theta == 1.0);
}

TEST_CASE("conditional expectation of the next step") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 17;
    const std::size_t d = 1 + trial % 6;
    const auto quad = QuadraticProblem::random(n, d, trial);
    const auto logit = LogisticProblem::synthetic(n, d, trial, 1.5);
    const FiniteSumProblem& problem = trial % 2 == 0 ? static_cast<const FiniteSumProblem&>(quad)
                                                     : static_cast<const FiniteSumProblem&>(logit);
    const Vector x_star = random_point(rng, d, 0.5);
    const ReferencePoint ref(problem, x_star);

    auto state = init_state(problem, random_point(rng, d, 2.0), random_point(rng, d, 2.0), trial);
    const auto schedule = StepSchedule::create(0.5, 0.75);
    for (int i = 0; i < trial; ++i) lambda_saga_step(state, problem, 0.6, schedule);

    const auto snap = diagnostics(state, problem, ref, schedule);
    const auto expect = conditional_step_expectation(state, problem, ref);
    const double closed = snap.tau2 / static_cast<double>(n) +
                          (1.0 - 1.0 / static_cast<double>(n)) * snap.A;
    CHECK(std::abs(expect.expected_A_next - closed) <= 1e-12 * std::max(1.0, closed));
    CHECK(expect.martingale_mean.isZero(0.0));

    // Element-by-element enumeration of Z agrees with zero to round-off.
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(d));
    const Vector mean = state.table.recomputed_mean();
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < d; ++j) sum(j) += state.table.row(k)[j] - mean(j);
    }
    CHECK(sum.norm() / static_cast<double>(n) <= 1e-13 * (1.0 + mean.norm() + snap.tau2 + snap.A));
  }

  const auto problem = scalar_pair();
  const ReferencePoint ref(problem, scalar(0.0));
  const auto at_opt_table = init_state(problem, scalar(0.0), scalar(3.0), 1);
  const auto expect = conditional_step_expectation(at_opt_table, problem, ref);
  CHECK(expect.expected_A_next == doctest::Approx(9.0 / 2.0));  // tau2(3) / N with A = 0
}

TEST_CASE("run cadence and errors") {
  const auto problem = QuadraticProblem::random(5, 2, 1);
  const auto schedule = StepSchedule::create(1.0, 1.0);
  CHECK_THROWS_WITH_AS(run(problem, 0.5, schedule, 10, 1, 0), doctest::Contains("cadence must be positive"),
                       std::invalid_argument);

  const auto trace = run(problem, 0.5, schedule, 25, 1, 10);
  REQUIRE(trace.snapshots.size() == 3);
  CHECK(trace.snapshots[0].n == 11);
  CHECK(trace.snapshots[1].n == 21);
  CHECK(trace.snapshots[2].n == 26);
  CHECK_FALSE(trace.snapshots[0].diagnostics.has_value());
  CHECK(trace.snapshots[0].grad_eval_norm > 0.0);

  const auto with_ref = run(problem, 0.5, schedule, 25, 1, 10, problem.reference_minimizer());
  REQUIRE(with_ref.snapshots[2].diagnostics.has_value());
  CHECK(with_ref.snapshots[2].diagnostics->n == 26);
  CHECK(same_bits(trace.final_iterate, with_ref.final_iterate));
}

TEST_CASE("lambda = 0 reproduces a standalone SGD loop bit for bit") {
  const auto problem = QuadraticProblem::random(50, 5, 99);
  const auto schedule = StepSchedule::create(1.0, 1.0);
  const std::uint64_t seed = 4242;
  const auto trace = run(problem, 0.0, schedule, 10000, seed, 10000);

  const IndexSampler sampler(seed);
  std::vector<double> x(5, 0.0), g(5);
  for (std::uint64_t n = 1; n <= 10000; ++n) {
    const std::size_t k = sampler.index(n, 50);
    const double gamma = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < 5; ++j) g[j] = x[j] - problem.anchor(k)[j];
    for (std::size_t j = 0; j < 5; ++j) x[j] = x[j] - gamma * g[j];
  }
  CHECK(same_bits(trace.final_iterate, Eigen::Map<Vector>(x.data(), 5)));
}

TEST_CASE("quadratic SAGA converges and matches an independent loop") {
  const auto problem = QuadraticProblem::random(50, 5, 7);
  const Vector x_star = *problem.reference_minimizer();
  const auto schedule = StepSchedule::create(1.0, 1.0);
  const auto trace = run(problem, 1.0, schedule, 100000, 2024, 100000, x_star);
  const double v = trace.snapshots.back().diagnostics->V;
  MESSAGE("final V_n " << v);
  CHECK(v < 1e-2);

  // Independent loop: stored gradients, mean summed afresh every step.
  const IndexSampler sampler(2024);
  const auto anchor = [&](std::size_t k) { return Eigen::Map<const Vector>(problem.anchor(k).data(), 5); };
  std::vector<Vector> stored(50);
  for (std::size_t k = 0; k < 50; ++k) stored[k] = -anchor(k);
  Vector x = Vector::Zero(5);
  for (std::uint64_t n = 1; n <= 100000; ++n) {
    const std::size_t k = sampler.index(n, 50);
    Vector mean = Vector::Zero(5);
    for (const auto& g : stored) mean += g;
    mean /= 50.0;
    const Vector grad = x - anchor(k);
    x -= (1.0 / static_cast<double>(n)) * ((grad - stored[k]) + mean);
    stored[k] = grad;
  }
  CHECK((x - trace.final_iterate).norm() <= 1e-10);
}

TEST_CASE("V_n eventually below 1e-2 for every seed") {
  const auto problem = QuadraticProblem::random(20, 2, 31);
  const Vector x_star = *problem.reference_minimizer();
  const auto schedule = StepSchedule::create(1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (double lambda : {0.0, 1.0}) {
      const auto trace = run(problem, lambda, schedule, 100000, seed, 10000, x_star);
      bool tail_ok = true;
      for (std::size_t i = trace.snapshots.size() / 2; i < trace.snapshots.size(); ++i) {
        tail_ok = tail_ok && trace.snapshots[i].diagnostics->V < 1e-2;
      }
      CAPTURE(seed);
      CAPTURE(lambda);
      CHECK(tail_ok);
    }
  }
}
