#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "lsaga/asymptotics.hpp"
#include "lsaga/engine.hpp"
#include "lsaga/rng.hpp"
#include "lsaga/simd.hpp"

namespace lsaga {
namespace {

// Calls body(rep) for rep in [0, count) on up to `workers` threads. Results
// must be written to per-replication slots so the reduction afterwards is
// independent of scheduling. The first exception is rethrown, prefixed with
// its replication index.
template <class Body>
void for_each_replication(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed_rep = 0;
  std::mutex failure_mutex;

  const auto work = [&] {
    for (std::size_t rep = next++; rep < count; rep = next++) {
      try {
        body(rep);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure || rep < failed_rep) {
          failure = std::current_exception();
          failed_rep = rep;
        }
        next = count;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(failed_rep) + ": " + e.what());
    }
  }
}

Vector start_point(const FiniteSumProblem& problem, const std::optional<Vector>& x0) {
  if (!x0) return Vector::Zero(static_cast<Eigen::Index>(problem.dim()));
  if (static_cast<std::size_t>(x0->size()) != problem.dim()) {
    throw std::invalid_argument("x0 dimension does not match the problem");
  }
  return *x0;
}

double sample_variance(const std::vector<double>& values) {
  const double count = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / (count - 1.0);
}

}  // namespace

MonteCarloSummary clt_ensemble(const FiniteSumProblem& problem, double lambda,
                               std::uint64_t n, std::size_t M, std::uint64_t base_seed,
                               const Vector& x_ref, const EnsembleOptions& options) {
  if (M < 2) throw std::invalid_argument("at least 2 replications are required");
  if (n < 1) throw std::invalid_argument("horizon n must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (static_cast<std::size_t>(x_ref.size()) != problem.dim()) {
    throw std::invalid_argument("x_ref dimension does not match the problem");
  }

  const auto schedule = StepSchedule::create(1.0, 1.0);
  const Vector x0 = start_point(problem, options.x0);
  const auto d = static_cast<Eigen::Index>(problem.dim());
  const double root_n = std::sqrt(static_cast<double>(n));
  Matrix points(static_cast<Eigen::Index>(M), d);

  for_each_replication(M, options.workers, [&](std::size_t rep) {
    OptimizerState state = init_state(problem, x0, replication_seed(base_seed, rep));
    while (state.n < n) lambda_saga_step(state, problem, lambda, schedule);
    points.row(static_cast<Eigen::Index>(rep)) = (root_n * (state.iterate - x_ref)).transpose();
  });

  MonteCarloSummary summary;
  summary.M = M;
  summary.n = n;
  summary.lambda = lambda;
  summary.base_seed = base_seed;
  summary.mean = points.colwise().mean().transpose();
  const Matrix centered = points.rowwise() - summary.mean.transpose();
  summary.sample_cov = (centered.transpose() * centered) / static_cast<double>(M - 1);

  std::vector<double> projected(M);
  for (std::size_t rep = 0; rep < M; ++rep) {
    projected[rep] = points.row(static_cast<Eigen::Index>(rep)).sum();
  }
  summary.sigma2_scalar = sample_variance(projected);

  if (options.bootstrap_resamples >= 2) {
    auto engine = make_engine(base_seed, 7);
    std::uniform_int_distribution<std::size_t> pick(0, M - 1);
    std::vector<double> resample(M);
    std::vector<double> estimates(options.bootstrap_resamples);
    for (auto& estimate : estimates) {
      for (auto& v : resample) v = projected[pick(engine)];
      estimate = sample_variance(resample);
    }
    summary.stderr_sigma2 = std::sqrt(sample_variance(estimates));
  }
  if (options.keep_points) summary.points = std::move(points);
  return summary;
}

std::optional<SlopeFit> fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const std::size_t m = x.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (m > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
      rss += r * r;
    }
    fit.half_width = 1.96 * std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  }
  return fit;
}

std::vector<std::uint64_t> log_checkpoints(std::uint64_t first, std::uint64_t last,
                                           std::size_t count) {
  if (first < 1 || last < first || count < 1) {
    throw std::invalid_argument("checkpoints need 1 <= first <= last and count >= 1");
  }
  std::vector<std::uint64_t> out;
  const double lo = std::log(static_cast<double>(first));
  const double hi = std::log(static_cast<double>(last));
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const auto value = static_cast<std::uint64_t>(std::llround(std::exp(lo + t * (hi - lo))));
    if (out.empty() || value > out.back()) out.push_back(value);
  }
  out.back() = last;
  return out;
}

RateEstimate rate_ensemble(const FiniteSumProblem& problem, double lambda,
                           const StepSchedule& schedule, int p,
                           std::vector<std::uint64_t> checkpoints, std::size_t M,
                           std::uint64_t base_seed, const Vector& x_ref,
                           const RateOptions& options) {
  if (p < 1) throw std::invalid_argument("p must be at least 1");
  if (M < 1) throw std::invalid_argument("at least 1 replication is required");
  if (checkpoints.size() < 2) {
    throw std::invalid_argument("slope undefined: at least two checkpoints are required");
  }
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.front() < 1) throw std::invalid_argument("checkpoints start at n = 1");
  if (checkpoints.size() < 2) {
    throw std::invalid_argument("slope undefined: at least two distinct checkpoints are required");
  }

  RateEstimate est;
  est.p = p;
  est.alpha = schedule.alpha();
  est.c = schedule.c();
  est.lambda = lambda;
  est.M = M;
  est.base_seed = base_seed;
  est.checkpoints = checkpoints;

  if (options.mu) {
    est.conditions = validate_rate_conditions(schedule, *options.mu, p);
    const bool ok = p == 1 ? est.conditions->l2_rate_ok : est.conditions->l2p_rate_ok;
    if (!ok) {
      est.warnings.push_back("rate hypotheses not met for p = " + std::to_string(p) +
                             "; estimates are reported without a guarantee");
      for (const auto& m : est.conditions->messages) est.warnings.push_back(m);
    }
  } else {
    est.warnings.push_back("no mu supplied; rate hypotheses not checked");
  }

  const Vector x0 = start_point(problem, options.x0);
  const ReferencePoint reference(problem, x_ref);
  const std::size_t count = checkpoints.size();
  std::vector<double> moment_slots(M * count);
  std::vector<double> gap_slots(M * count);

  for_each_replication(M, options.workers, [&](std::size_t rep) {
    OptimizerState state = init_state(problem, x0, replication_seed(base_seed, rep));
    for (std::size_t c = 0; c < count; ++c) {
      while (state.n < checkpoints[c]) lambda_saga_step(state, problem, lambda, schedule);
      const double v = simd::squared_distance(view(state.iterate), view(reference.x()));
      const double gap = problem.value(view(state.iterate)) - reference.value();
      moment_slots[rep * count + c] = std::pow(v, p);
      gap_slots[rep * count + c] = std::pow(gap, p);
    }
  });

  est.moments.assign(count, 0.0);
  est.value_gap_moments.assign(count, 0.0);
  for (std::size_t rep = 0; rep < M; ++rep) {
    for (std::size_t c = 0; c < count; ++c) {
      est.moments[c] += moment_slots[rep * count + c];
      est.value_gap_moments[c] += gap_slots[rep * count + c];
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    est.moments[c] /= static_cast<double>(M);
    est.value_gap_moments[c] /= static_cast<double>(M);
  }

  std::vector<double> xs, ys, gaps;
  for (std::size_t c = 0; c < count; ++c) {
    if (checkpoints[c] < options.burn_in) continue;
    xs.push_back(static_cast<double>(checkpoints[c]));
    ys.push_back(est.moments[c]);
    gaps.push_back(est.value_gap_moments[c]);
  }
  if (xs.size() < 2) {
    est.warnings.push_back("fewer than two checkpoints after burn-in; slope undefined");
    return est;
  }
  est.fit = fit_log_log(xs, ys);
  if (!est.fit) est.warnings.push_back("a moment is not positive; slope undefined");
  est.value_gap_fit = fit_log_log(xs, gaps);
  if (!est.value_gap_fit) est.warnings.push_back("a value-gap moment is not positive; slope undefined");

  const double exponent = static_cast<double>(p) * schedule.alpha();
  const double first = ys.front() * std::pow(xs.front(), exponent);
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    worst = std::max(worst, ys[i] * std::pow(xs[i], exponent));
  }
  est.bounded_ratio = first > 0.0 ? worst / first : 0.0;
  return est;
}

}  // namespace lsaga
