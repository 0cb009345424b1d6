#include "lsaga/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lsaga/asymptotics.hpp"
#include "lsaga/rng.hpp"
#include "lsaga/simd.hpp"

namespace lsaga {

AssumptionReport check_assumptions(const FiniteSumProblem& problem,
                                   const std::vector<int>& p_list,
                                   std::size_t sample_count, std::uint64_t seed,
                                   std::optional<Vector> x_star, double radius) {
  if (!x_star) x_star = problem.reference_minimizer();
  if (!x_star) {
    throw std::invalid_argument("check_assumptions needs a reference minimizer for " +
                                problem.descriptor());
  }
  if (static_cast<std::size_t>(x_star->size()) != problem.dim()) {
    throw std::invalid_argument("minimizer dimension does not match the problem");
  }
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");

  const std::size_t n = problem.size();
  const std::size_t d = problem.dim();
  AssumptionReport report;
  report.samples = sample_count;
  report.radius = radius;
  report.seed = seed;
  report.gradient_norm_at_optimum = problem.full_gradient(*x_star).norm();
  report.L = problem.lipschitz_constant(1);
  for (int p : p_list) {
    if (p < 1) throw std::invalid_argument("p must be at least 1");
    report.Lp.push_back({p, problem.lipschitz_constant(p), 0, 0.0});
  }
  if (auto h = problem.hessian(view(*x_star))) report.rho = min_eigenvalue(*h);

  // Component gradients at the optimum, reused for every sample.
  std::vector<double> at_opt(n * d);
  for (std::size_t k = 0; k < n; ++k) {
    problem.component_gradient(k, view(*x_star), {at_opt.data() + k * d, d});
  }

  auto engine = make_engine(seed, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(d), grad(d), gk(d);
  double mu = std::numeric_limits<double>::infinity();
  bool secant_positive = true;
  std::size_t l1_violations = 0;
  constexpr double kSlack = 1e-12;

  for (std::size_t s = 0; s < sample_count; ++s) {
    for (std::size_t j = 0; j < d; ++j) x(j) = (*x_star)(j) + radius * normal(engine);
    const Vector delta = x - *x_star;
    const double dist2 = delta.squaredNorm();
    if (dist2 == 0.0) continue;

    problem.full_gradient(view(x), view(grad));
    const double secant = delta.dot(grad);
    secant_positive = secant_positive && secant > 0.0;
    mu = std::min(mu, secant / dist2);

    std::vector<double> lhs(report.Lp.size(), 0.0);
    double lhs1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      problem.component_gradient(k, view(x), view(gk));
      const double diff2 = simd::squared_distance(view(gk), {at_opt.data() + k * d, d});
      lhs1 += diff2;
      for (std::size_t i = 0; i < report.Lp.size(); ++i) {
        lhs[i] += std::pow(diff2, report.Lp[i].p);
      }
    }
    lhs1 /= static_cast<double>(n);
    if (report.L && lhs1 > *report.L * dist2 * (1.0 + kSlack)) ++l1_violations;

    for (std::size_t i = 0; i < report.Lp.size(); ++i) {
      auto& check = report.Lp[i];
      if (!check.constant) continue;
      const double bound = *check.constant * std::pow(dist2, check.p);
      const double value = lhs[i] / static_cast<double>(n);
      if (bound > 0.0) check.worst_ratio = std::max(check.worst_ratio, value / bound);
      if (value > bound * (1.0 + kSlack)) ++check.violations;
    }
  }

  report.mu_estimate = std::isfinite(mu) ? std::max(mu, 0.0) : 0.0;
  report.flags.equilibrium = report.gradient_norm_at_optimum <= 1e-8;
  report.flags.positive_secant = secant_positive && sample_count > 0;
  report.flags.lipschitz_at_optimum = report.L.has_value() && l1_violations == 0;
  if (report.rho) report.flags.curvature = *report.rho > 0.5;
  report.flags.restricted_secant = report.mu_estimate > 0.0;
  for (const auto& check : report.Lp) {
    report.flags.moment_lipschitz.push_back(check.constant.has_value() &&
                                            check.violations == 0);
  }
  return report;
}

}  // namespace lsaga
