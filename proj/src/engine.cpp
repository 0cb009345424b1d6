#include "lsaga/engine.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lsaga/simd.hpp"

namespace lsaga {

// GradientTable

GradientTable::GradientTable(const FiniteSumProblem& problem, std::span<const double> x0,
                             std::size_t resync_period)
    : n_(problem.size()),
      d_(problem.dim()),
      resync_period_(resync_period == 0 ? problem.size() : resync_period),
      rows_(n_ * d_),
      mean_(Vector::Zero(static_cast<Eigen::Index>(d_))) {
  if (x0.size() != d_) {
    throw std::invalid_argument("table initialisation point has dimension " +
                                std::to_string(x0.size()) + ", problem has " +
                                std::to_string(d_));
  }
  for (std::size_t k = 0; k < n_; ++k) {
    problem.component_gradient(k, x0, {rows_.data() + k * d_, d_});
  }
  resync();
}

void GradientTable::replace(std::size_t k, std::span<const double> new_row) {
  double* row = rows_.data() + k * d_;
  simd::mean_correction(view(mean_), new_row, {row, d_}, static_cast<double>(n_));
  std::copy(new_row.begin(), new_row.end(), row);
  if (++since_resync_ >= resync_period_) resync();
}

void GradientTable::resync() {
  mean_ = recomputed_mean();
  since_resync_ = 0;
}

Vector GradientTable::recomputed_mean() const {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(d_));
  for (std::size_t k = 0; k < n_; ++k) simd::accumulate(row(k), view(sum));
  simd::divide(static_cast<double>(n_), view(sum));
  return sum;
}

// Steps

OptimizerState init_state(const FiniteSumProblem& problem, const Vector& x0,
                          const Vector& x1, std::uint64_t seed,
                          std::size_t resync_period) {
  if (static_cast<std::size_t>(x1.size()) != problem.dim()) {
    throw std::invalid_argument("initial iterate has dimension " +
                                std::to_string(x1.size()) + ", problem has " +
                                std::to_string(problem.dim()));
  }
  return OptimizerState{x1,
                        GradientTable(problem, view(x0), resync_period),
                        1,
                        seed,
                        IndexSampler(seed),
                        Vector::Zero(static_cast<Eigen::Index>(problem.dim()))};
}

OptimizerState init_state(const FiniteSumProblem& problem, const Vector& x0,
                          std::uint64_t seed, std::size_t resync_period) {
  return init_state(problem, x0, x0, seed, resync_period);
}

void lambda_saga_step(OptimizerState& state, const FiniteSumProblem& problem,
                      double lambda, double gamma, std::size_t k) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  if (k >= problem.size()) {
    throw std::out_of_range("component index " + std::to_string(k) +
                            " out of range for N = " + std::to_string(problem.size()));
  }
  problem.component_gradient(k, view(state.iterate), view(state.scratch));
  simd::lambda_saga_update(view(state.iterate), view(state.scratch), state.table.row(k),
                           state.table.mean(), lambda, gamma);
  state.table.replace(k, view(state.scratch));
  ++state.n;
}

std::size_t lambda_saga_step(OptimizerState& state, const FiniteSumProblem& problem,
                             double lambda, const StepSchedule& schedule) {
  const std::size_t k = state.sampler.index(state.n, problem.size());
  lambda_saga_step(state, problem, lambda, schedule.gamma(state.n), k);
  return k;
}

// Diagnostics

ReferencePoint::ReferencePoint(const FiniteSumProblem& problem, Vector x_star)
    : n_(problem.size()), d_(problem.dim()), x_(std::move(x_star)), grads_(n_ * d_) {
  if (static_cast<std::size_t>(x_.size()) != d_) {
    throw std::invalid_argument("reference point dimension does not match the problem");
  }
  double theta = 0.0;
  for (std::size_t k = 0; k < n_; ++k) {
    problem.component_gradient(k, view(x_), {grads_.data() + k * d_, d_});
    theta += simd::squared_norm(component_gradient(k));
  }
  theta_ = theta / static_cast<double>(n_);
  value_ = problem.value(view(x_));
}

double ReferencePoint::theta(int p) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < n_; ++k) {
    sum += std::pow(simd::squared_norm(component_gradient(k)), p);
  }
  return sum / static_cast<double>(n_);
}

DiagnosticsSnapshot diagnostics(const OptimizerState& state,
                                const FiniteSumProblem& problem,
                                const ReferencePoint& reference,
                                const StepSchedule& schedule) {
  const std::size_t n = problem.size();
  const double count = static_cast<double>(n);
  Vector grad(static_cast<Eigen::Index>(problem.dim()));

  DiagnosticsSnapshot snap;
  snap.n = state.n;
  snap.V = simd::squared_distance(view(state.iterate), view(reference.x()));
  double a = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    a += simd::squared_distance(state.table.row(k), reference.component_gradient(k));
    problem.component_gradient(k, view(state.iterate), view(grad));
    tau += simd::squared_distance(view(grad), reference.component_gradient(k));
  }
  snap.A = a / count;
  snap.tau2 = tau / count;
  const double previous_gamma = schedule.gamma(state.n > 1 ? state.n - 1 : 1);
  snap.T = snap.V + 3.0 * count * previous_gamma * previous_gamma * snap.A;
  snap.grad_eval_norm = std::sqrt(simd::squared_norm(state.table.mean()));
  snap.value_gap = problem.value(view(state.iterate)) - reference.value();
  return snap;
}

MomentDiagnostics moment_diagnostics(const OptimizerState& state,
                                     const FiniteSumProblem& problem,
                                     const ReferencePoint& reference, int p) {
  if (p < 1) throw std::invalid_argument("p must be at least 1");
  const std::size_t n = problem.size();
  Vector grad(static_cast<Eigen::Index>(problem.dim()));
  double a = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    a += std::pow(
        simd::squared_distance(state.table.row(k), reference.component_gradient(k)), p);
    problem.component_gradient(k, view(state.iterate), view(grad));
    tau += std::pow(simd::squared_distance(view(grad), reference.component_gradient(k)), p);
  }
  return {p, a / static_cast<double>(n), tau / static_cast<double>(n), reference.theta(p)};
}

StepExpectation conditional_step_expectation(const OptimizerState& state,
                                             const FiniteSumProblem& problem,
                                             const ReferencePoint& reference) {
  const std::size_t n = problem.size();
  const double count = static_cast<double>(n);
  Vector grad(static_cast<Eigen::Index>(problem.dim()));

  // Per-row discrepancy now, and what row k would hold if k were drawn next.
  std::vector<double> current(n);
  std::vector<double> refreshed(n);
  for (std::size_t k = 0; k < n; ++k) {
    current[k] = simd::squared_distance(state.table.row(k), reference.component_gradient(k));
    problem.component_gradient(k, view(state.iterate), view(grad));
    refreshed[k] = simd::squared_distance(view(grad), reference.component_gradient(k));
  }

  double expected = 0.0;
  for (std::size_t drawn = 0; drawn < n; ++drawn) {
    double a_next = 0.0;
    for (std::size_t j = 0; j < n; ++j) a_next += j == drawn ? refreshed[j] : current[j];
    expected += a_next / count;
  }
  expected /= count;

  // Z for draw k is g_k minus the exact row mean. Averaged over k this is the
  // row mean minus itself, evaluated with one summation so it cancels exactly.
  const Vector row_mean = state.table.recomputed_mean();
  Vector z_sum = Vector::Zero(static_cast<Eigen::Index>(problem.dim()));
  for (std::size_t k = 0; k < n; ++k) simd::accumulate(state.table.row(k), view(z_sum));
  simd::divide(count, view(z_sum));
  return {expected, z_sum - row_mean};
}

// Runs

RunTrace run(const FiniteSumProblem& problem, double lambda, const StepSchedule& schedule,
             std::uint64_t n_iters, std::uint64_t seed, std::uint64_t diag_every,
             const std::optional<Vector>& x_ref, const RunOptions& options) {
  if (diag_every == 0) throw std::invalid_argument("cadence must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  const auto start = std::chrono::steady_clock::now();
  const Vector x0 = options.x0.value_or(Vector::Zero(static_cast<Eigen::Index>(problem.dim())));
  const Vector x1 = options.x1.value_or(x0);

  std::optional<ReferencePoint> reference;
  if (x_ref) reference.emplace(problem, *x_ref);

  RunTrace trace{schedule, lambda, seed, n_iters, diag_every, {}, x0, x1, {}, 0.0};
  OptimizerState state = init_state(problem, x0, x1, seed, options.resync_period);

  const auto record = [&] {
    RunSnapshot snap;
    snap.n = state.n;
    snap.grad_eval_norm = std::sqrt(simd::squared_norm(state.table.mean()));
    if (reference) snap.diagnostics = diagnostics(state, problem, *reference, schedule);
    trace.snapshots.push_back(std::move(snap));
  };

  for (std::uint64_t i = 1; i <= n_iters; ++i) {
    try {
      lambda_saga_step(state, problem, lambda, schedule);
    } catch (const std::exception& e) {
      throw std::runtime_error("iteration " + std::to_string(state.n) + ": " + e.what());
    }
    if (i % diag_every == 0 || i == n_iters) record();
  }

  trace.final_iterate = state.iterate;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace lsaga
