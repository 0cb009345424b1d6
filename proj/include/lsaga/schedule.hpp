#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lsaga {

/// Decreasing step sequence gamma_n = c / n^alpha with c > 0 and
/// 1/2 < alpha <= 1, so that sum gamma_n diverges and sum gamma_n^2 converges.
class StepSchedule {
 public:
  /// Throws std::invalid_argument when c <= 0, alpha <= 1/2 or alpha > 1.
  static StepSchedule create(double c, double alpha);

  double c() const { return c_; }
  double alpha() const { return alpha_; }

  /// Step used for the update from X_n to X_{n+1}; n >= 1.
  double gamma(std::uint64_t n) const;

  /// Smallest index N such that gamma(n) < eps for every n > N.
  std::uint64_t steps_below(double eps) const;

  bool operator==(const StepSchedule&) const = default;

 private:
  StepSchedule(double c, double alpha) : c_(c), alpha_(alpha) {}
  double c_;
  double alpha_;
};

struct RateConditionReport {
  int p = 1;
  double mu = 0.0;
  bool l2_rate_ok = false;  // L^2 rate hypotheses: 2 c mu <= 2^alpha, and 2 c mu > 1 when alpha = 1
  bool l2p_rate_ok = false;  // L^{2p} rate hypotheses: p c mu <= 2^alpha, and c mu > 1 when alpha = 1
  std::vector<std::string> messages;

  bool operator==(const RateConditionReport&) const = default;
};

/// Checks the step-size hypotheses of the L^2 and L^{2p} rate bounds. Exact
/// floating-point comparisons, no tolerance band.
RateConditionReport validate_rate_conditions(const StepSchedule& schedule,
                                             double mu, int p);

}  // namespace lsaga
