#pragma once

#include <stdexcept>
#include <cstdint>
#include <span>
#include <vector>

namespace lsaga {

/// Constants of the norm-power inequality
///   ||a + b||^{2+p} <= ||a||^{2+p} + (2+p) <a, b> ||a||^p
///                      + C_p ||a||^p ||b||^2 + D_p ||b||^{2+p}
/// for even p >= 2.
struct NormPowerConstants {
  int p = 2;
  double C = 0.0;
  double D = 0.0;
};

/// C_2 = 8, D_2 = 3 and, for even p >= 4,
///   C_p = 3p + (4/p)((p-1) C_{p-2} + D_{p-2})
///   D_p = 1 + (4/p)(C_{p-2} + (p-1) D_{p-2}).
/// Throws std::invalid_argument for odd or non-positive p.
NormPowerConstants cp_dp(int p);

struct InequalityCheck {
  bool holds = false;
  double slack = 0.0;  // right-hand side minus left-hand side
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Evaluates both sides; holds when slack >= -1e-9 * max(1, rhs).
InequalityCheck check_norm_power_inequality(std::span<const double> a,
                                            std::span<const double> b, int p);

struct RandomizedInequalitySummary {
  int p = 2;
  std::size_t dim = 1;
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double min_relative_slack = 0.0;  // min slack / max(1, rhs)
  std::uint64_t seed = 0;
};

/// `pairs` standard-normal (a, b) draws in dimension `dim`.
RandomizedInequalitySummary randomized_inequality_check(int p, std::size_t dim,
                                                        std::size_t pairs,
                                                        std::uint64_t seed);

/// Worst case of Z_{n+1} <= (1 - a/(n+1)^alpha) Z_n + b/(n+1)^beta.
struct RecursionTrace {
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> Z;    // Z[0] is Z_1
  double sup_scaled = 0.0;  // max_n Z_n n^{beta - alpha}
  /// Relative growth of the running maximum of Z_n n^{beta - alpha} over the
  /// final half of the trace.
  double late_growth = 0.0;
  bool plateaued = false;   // late_growth <= 1%
};

/// Iterates the recursion at equality from Z_1 = z1 for n_max terms. The
/// parameters must satisfy a <= 2^alpha, alpha <= 1, 1 < beta < 2,
/// beta <= 2 alpha and, when alpha = 1, beta < a + 1; otherwise
/// std::invalid_argument lists every violated constraint.
RecursionTrace recursion_bound_trace(double a, double b, double alpha, double beta,
                                     double z1, std::size_t n_max);

}  // namespace lsaga
