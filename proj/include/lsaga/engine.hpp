#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lsaga/problems.hpp"
#include "lsaga/rng.hpp"
#include "lsaga/schedule.hpp"
#include "lsaga/types.hpp"

namespace lsaga {

/// The SAGA memory: one stored gradient per component plus their mean.
///
/// The mean is maintained incrementally, O(d) per replacement, and recomputed
/// by full summation every `resync_period` replacements to bound drift.
class GradientTable {
 public:
  /// Rows initialised to grad f_k(x0). `resync_period` 0 picks N; pass
  /// `kNeverResync` to disable resynchronisation.
  GradientTable(const FiniteSumProblem& problem, std::span<const double> x0,
                std::size_t resync_period = 0);

  static constexpr std::size_t kNeverResync = static_cast<std::size_t>(-1);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  std::span<const double> row(std::size_t k) const { return {rows_.data() + k * d_, d_}; }
  std::span<const double> mean() const { return view(mean_); }
  const Vector& mean_vector() const { return mean_; }

  /// Overwrites row k and corrects the mean by (new - old) / N.
  void replace(std::size_t k, std::span<const double> new_row);

  /// Recomputes the mean by summing every row.
  void resync();

  /// Fresh full-summation mean; does not touch the stored one.
  Vector recomputed_mean() const;

  std::size_t resync_period() const { return resync_period_; }

 private:
  std::size_t n_;
  std::size_t d_;
  std::size_t resync_period_;
  std::size_t since_resync_ = 0;
  std::vector<double> rows_;  // row-major N x d
  Vector mean_;
};

/// X_n together with the table g_{n,.}, the counter n and the sampling key.
/// Confined to one thread at a time.
struct OptimizerState {
  Vector iterate;
  GradientTable table;
  std::uint64_t n = 1;
  std::uint64_t seed = 0;
  IndexSampler sampler{0};
  Vector scratch;  // gradient buffer reused across steps
};

/// Table rows grad f_k(x0), iterate x1, n = 1.
OptimizerState init_state(const FiniteSumProblem& problem, const Vector& x0,
                          const Vector& x1, std::uint64_t seed,
                          std::size_t resync_period = 0);
OptimizerState init_state(const FiniteSumProblem& problem, const Vector& x0,
                          std::uint64_t seed, std::size_t resync_period = 0);

/// One update with a given component index k (zero-based):
///   X_{n+1} = X_n - gamma (grad f_k(X_n) - lambda (g_{n,k} - mean_n))
/// using the pre-update row and mean, then g_{n+1,k} = grad f_k(X_n).
void lambda_saga_step(OptimizerState& state, const FiniteSumProblem& problem,
                      double lambda, double gamma, std::size_t k);

/// One update with k drawn from the state's sampling stream at counter n and
/// gamma = schedule.gamma(n). Returns the drawn index.
std::size_t lambda_saga_step(OptimizerState& state, const FiniteSumProblem& problem,
                             double lambda, const StepSchedule& schedule);

/// Quantities that depend only on the problem and a reference point x*:
/// component gradients there, f(x*) and theta* = (1/N) sum ||grad f_k(x*)||^2.
class ReferencePoint {
 public:
  ReferencePoint(const FiniteSumProblem& problem, Vector x_star);

  const Vector& x() const { return x_; }
  std::span<const double> component_gradient(std::size_t k) const {
    return {grads_.data() + k * d_, d_};
  }
  double value() const { return value_; }
  double theta() const { return theta_; }
  /// theta*_p = (1/N) sum ||grad f_k(x*)||^{2p}
  double theta(int p) const;

 private:
  std::size_t n_;
  std::size_t d_;
  Vector x_;
  std::vector<double> grads_;
  double value_;
  double theta_;
};

struct DiagnosticsSnapshot {
  std::uint64_t n = 0;
  double V = 0.0;       // ||X_n - x*||^2
  double A = 0.0;       // (1/N) sum ||g_{n,k} - grad f_k(x*)||^2
  double tau2 = 0.0;    // (1/N) sum ||grad f_k(X_n) - grad f_k(x*)||^2
  double T = 0.0;       // V + 3 N gamma_{n-1}^2 A
  double grad_eval_norm = 0.0;  // ||mean of table rows||
  double value_gap = 0.0;       // f(X_n) - f(x*)
};

/// Order-2p analogues A_{p,n}, tau^{2p}(X_n) and theta*_p.
struct MomentDiagnostics {
  int p = 1;
  double A = 0.0;
  double tau = 0.0;
  double theta = 0.0;
};

/// T_n uses gamma_{n-1}; at n = 1 the first step gamma_1 stands in.
DiagnosticsSnapshot diagnostics(const OptimizerState& state,
                                const FiniteSumProblem& problem,
                                const ReferencePoint& reference,
                                const StepSchedule& schedule);

MomentDiagnostics moment_diagnostics(const OptimizerState& state,
                                     const FiniteSumProblem& problem,
                                     const ReferencePoint& reference, int p);

struct StepExpectation {
  double expected_A_next = 0.0;
  Vector martingale_mean;
};

/// Averages over all N equally likely next draws: the resulting A_{n+1}, and
/// the centred table term Z_{n+1} = g_{n,k} - (1/N) sum_j g_{n,j}. State is
/// not modified.
StepExpectation conditional_step_expectation(const OptimizerState& state,
                                             const FiniteSumProblem& problem,
                                             const ReferencePoint& reference);

struct RunSnapshot {
  std::uint64_t n = 0;
  double grad_eval_norm = 0.0;
  std::optional<DiagnosticsSnapshot> diagnostics;  // present when x* was supplied
};

struct RunTrace {
  StepSchedule schedule;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  std::uint64_t diag_every = 0;
  std::vector<RunSnapshot> snapshots;
  Vector initial_table_point;
  Vector initial_iterate;
  Vector final_iterate;
  double wall_seconds = 0.0;
};

struct RunOptions {
  std::optional<Vector> x0;  // table initialisation point, default zero
  std::optional<Vector> x1;  // first iterate, default x0
  std::size_t resync_period = 0;
};

/// n_iters steps with i.i.d. uniform component draws from `seed`. A snapshot
/// is taken after every `diag_every` steps and after the last one.
RunTrace run(const FiniteSumProblem& problem, double lambda, const StepSchedule& schedule,
             std::uint64_t n_iters, std::uint64_t seed, std::uint64_t diag_every,
             const std::optional<Vector>& x_ref = std::nullopt,
             const RunOptions& options = {});

}  // namespace lsaga
