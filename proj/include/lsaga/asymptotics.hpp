#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsaga/problems.hpp"
#include "lsaga/schedule.hpp"
#include "lsaga/types.hpp"

namespace lsaga {

/// Smallest eigenvalue of a symmetric matrix. Throws std::invalid_argument if
/// H is not symmetric to 1e-10 (relative to its largest entry).
double min_eigenvalue(const Matrix& H);

/// Gamma = (1/N) sum_k grad f_k(x*) grad f_k(x*)^T. Throws
/// std::invalid_argument if ||grad f(x*)|| exceeds `gradient_tol`.
Matrix gamma_matrix(const FiniteSumProblem& problem, const Vector& x_star,
                    double gradient_tol = 1e-8);

/// Limiting covariance of sqrt(n) (X_n - x*) under gamma_n = 1/n.
struct AsymptoticCovariance {
  Matrix H;
  Matrix Gamma;
  double lambda = 0.0;
  Matrix Sigma;
  double rho = 0.0;
};

/// Solves (H - I/2) Sigma + Sigma (H - I/2) = (1 - lambda)^2 Gamma in the
/// eigenbasis of H. Requires rho = lambda_min(H) > 1/2.
AsymptoticCovariance solve_lyapunov(const Matrix& H, const Matrix& Gamma, double lambda);

/// ||(H - I/2) Sigma + Sigma (H - I/2) - (1 - lambda)^2 Gamma||_F / max(1, ||Gamma||_F)
double lyapunov_residual(const AsymptoticCovariance& cov);

/// exp(A) by scaling and squaring of a truncated Taylor series.
Matrix expm(const Matrix& A);

/// Composite Simpson rule for
///   (1 - lambda)^2 int_0^horizon exp(-(H - I/2) u)^T Gamma exp(-(H - I/2) u) du.
/// `steps` is rounded up to even. Throws std::invalid_argument when the
/// neglected tail exp(-(2 rho - 1) horizon) exceeds 1e-12; the message names
/// the required horizon.
Matrix quadrature_covariance(const Matrix& H, const Matrix& Gamma, double lambda,
                             double horizon, std::size_t steps);

/// Horizon at which the neglected tail of the covariance integral is 1e-12.
double required_horizon(double rho);

struct EnsembleOptions {
  unsigned workers = 1;
  std::optional<Vector> x0;  // table point and first iterate, default zero
  bool keep_points = false;  // retain sqrt(n)(X_n - x*) per replication
  std::size_t bootstrap_resamples = 1000;
};

struct MonteCarloSummary {
  std::size_t M = 0;
  std::uint64_t n = 0;
  double lambda = 0.0;
  std::uint64_t base_seed = 0;
  Vector mean;        // of sqrt(n)(X_n - x*)
  Matrix sample_cov;  // unbiased, divisor M - 1
  double sigma2_scalar = 0.0;  // sample variance of sum_i sqrt(n)(X_n - x*)_i
  double stderr_sigma2 = 0.0;  // bootstrap standard error of sigma2_scalar
  Matrix points;               // M x d, only with keep_points
};

/// Seed of replication `rep` in an ensemble started from `base_seed`.
constexpr std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t rep) {
  return base_seed ^ rep;
}

/// M independent lambda-SAGA runs with gamma_n = 1/n, each stopped at X_n.
/// The summary depends only on the set of replication seeds, not on worker
/// count or completion order.
MonteCarloSummary clt_ensemble(const FiniteSumProblem& problem, double lambda,
                               std::uint64_t n, std::size_t M, std::uint64_t base_seed,
                               const Vector& x_ref, const EnsembleOptions& options = {});

/// Least-squares fit of log(y) against log(x).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 1.96 standard errors; 0 with two points
};

/// Requires at least two points and strictly positive y.
std::optional<SlopeFit> fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

struct RateOptions {
  unsigned workers = 1;
  std::optional<double> mu;      // restricted secant constant for the condition check
  std::uint64_t burn_in = 100;   // checkpoints below this are not fitted
  std::optional<Vector> x0;
};

struct RateEstimate {
  int p = 1;
  double alpha = 1.0;
  double c = 1.0;
  double lambda = 0.0;
  std::size_t M = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> moments;             // E ||X_n - x*||^{2p}
  std::vector<double> value_gap_moments;   // E (f(X_n) - f(x*))^p
  std::optional<SlopeFit> fit;             // of moments over fitted checkpoints
  std::optional<SlopeFit> value_gap_fit;
  /// max over fitted checkpoints of moment * n^{p alpha}, relative to its
  /// value at the first fitted checkpoint.
  double bounded_ratio = 0.0;
  std::optional<RateConditionReport> conditions;
  std::vector<std::string> warnings;
};

/// Monte-Carlo estimate of the L^{2p} convergence rate. Throws
/// std::invalid_argument for fewer than two checkpoints or M < 1; a failed
/// condition check is recorded as a warning and the run proceeds.
RateEstimate rate_ensemble(const FiniteSumProblem& problem, double lambda,
                           const StepSchedule& schedule, int p,
                           std::vector<std::uint64_t> checkpoints, std::size_t M,
                           std::uint64_t base_seed, const Vector& x_ref,
                           const RateOptions& options = {});

/// Log-spaced integer checkpoints in [first, last], strictly increasing.
std::vector<std::uint64_t> log_checkpoints(std::uint64_t first, std::uint64_t last,
                                           std::size_t count);

}  // namespace lsaga
