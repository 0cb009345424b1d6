#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lsaga/problems.hpp"

namespace lsaga {

struct LpCheck {
  int p = 1;
  std::optional<double> constant;  // closed form, if the problem has one
  std::size_t violations = 0;      // sampled points breaking the bound
  double worst_ratio = 0.0;        // max lhs / (L_p ||x - x*||^{2p})
};

struct AssumptionFlags {
  bool equilibrium = false;        // grad f(x*) ~ 0 (1e-8)
  bool positive_secant = false;    // <x - x*, grad f(x)> > 0 at every sample
  bool lipschitz_at_optimum = false;
  std::optional<bool> curvature;   // rho > 1/2, absent without a Hessian
  bool restricted_secant = false;  // mu_estimate > 0
  std::vector<bool> moment_lipschitz;  // one per requested p
};

/// Numerical probe of the standing assumptions around a reference minimizer.
/// `mu_estimate` is the smallest sampled <x - x*, grad f(x)> / ||x - x*||^2:
/// an empirical estimate, not a certificate.
struct AssumptionReport {
  std::size_t samples = 0;
  double radius = 1.0;
  std::uint64_t seed = 0;
  double gradient_norm_at_optimum = 0.0;
  std::optional<double> L;
  std::vector<LpCheck> Lp;
  std::optional<double> rho;
  double mu_estimate = 0.0;
  AssumptionFlags flags;
};

/// Samples x = x* + radius * z with z standard normal. Throws
/// std::invalid_argument when no minimizer is supplied and the problem has no
/// closed form one.
AssumptionReport check_assumptions(const FiniteSumProblem& problem,
                                   const std::vector<int>& p_list,
                                   std::size_t sample_count, std::uint64_t seed,
                                   std::optional<Vector> x_star = std::nullopt,
                                   double radius = 1.0);

}  // namespace lsaga
