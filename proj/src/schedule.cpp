#include "lsaga/schedule.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lsaga {

StepSchedule StepSchedule::create(double c, double alpha) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("c must be positive");
  }
  if (!(alpha > 0.5)) {
    throw std::invalid_argument(
        "alpha must exceed 1/2 (square-summability of the steps fails)");
  }
  if (alpha > 1.0) {
    throw std::invalid_argument(
        "alpha must not exceed 1 (no rate or convergence guarantee covers it)");
  }
  return StepSchedule(c, alpha);
}

double StepSchedule::gamma(std::uint64_t n) const {
  if (n == 0) throw std::invalid_argument("step index starts at 1");
  if (alpha_ == 1.0) return c_ / static_cast<double>(n);
  return c_ / std::pow(static_cast<double>(n), alpha_);
}

std::uint64_t StepSchedule::steps_below(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  return static_cast<std::uint64_t>(std::ceil(std::pow(c_ / eps, 1.0 / alpha_)));
}

RateConditionReport validate_rate_conditions(const StepSchedule& schedule,
                                             double mu, int p) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (p < 1) throw std::invalid_argument("p must be at least 1");

  const double c = schedule.c();
  const double alpha = schedule.alpha();
  const double cap = std::pow(2.0, alpha);
  const bool unit_alpha = alpha == 1.0;

  RateConditionReport report;
  report.p = p;
  report.mu = mu;

  const double two_c_mu = 2.0 * c * mu;
  const bool l2_cap = two_c_mu <= cap;
  const bool l2_floor = !unit_alpha || two_c_mu > 1.0;
  report.l2_rate_ok = l2_cap && l2_floor;
  if (!l2_cap) {
    std::ostringstream os;
    os << "L2 rate: 2*c*mu = " << two_c_mu << " exceeds 2^alpha = " << cap;
    report.messages.push_back(os.str());
  }
  if (!l2_floor) {
    std::ostringstream os;
    os << "L2 rate: alpha = 1 requires 2*c*mu > 1, got " << two_c_mu;
    report.messages.push_back(os.str());
  }

  const double p_c_mu = static_cast<double>(p) * c * mu;
  const bool lp_cap = p_c_mu <= cap;
  const bool lp_floor = !unit_alpha || c * mu > 1.0;
  report.l2p_rate_ok = lp_cap && lp_floor;
  if (!lp_cap) {
    std::ostringstream os;
    os << "L" << 2 * p << " rate: p*c*mu = " << p_c_mu << " exceeds 2^alpha = " << cap;
    report.messages.push_back(os.str());
  }
  if (!lp_floor) {
    std::ostringstream os;
    os << "L" << 2 * p << " rate: alpha = 1 requires c*mu > 1, got " << c * mu;
    report.messages.push_back(os.str());
  }
  return report;
}

}  // namespace lsaga
