#include "lsaga/appendix.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lsaga/rng.hpp"
#include "lsaga/simd.hpp"

namespace lsaga {

NormPowerConstants cp_dp(int p) {
  if (p < 2 || p % 2 != 0) {
    throw std::invalid_argument("p must be an even integer >= 2, got " + std::to_string(p));
  }
  double c = 8.0;
  double d = 3.0;
  for (int q = 4; q <= p; q += 2) {
    const double factor = 4.0 / q;
    const double next_c = 3.0 * q + factor * ((q - 1) * c + d);
    const double next_d = 1.0 + factor * (c + (q - 1) * d);
    c = next_c;
    d = next_d;
  }
  return {p, c, d};
}

InequalityCheck check_norm_power_inequality(std::span<const double> a,
                                            std::span<const double> b, int p) {
  if (a.size() != b.size()) throw std::invalid_argument("a and b must have equal dimension");
  const auto constants = cp_dp(p);
  std::vector<double> sum(a.size());
  std::copy(a.begin(), a.end(), sum.begin());
  simd::accumulate(b, sum);

  const double na = std::sqrt(simd::squared_norm(a));
  const double nb = std::sqrt(simd::squared_norm(b));
  const double nab = std::sqrt(simd::squared_norm(sum));
  const double inner = simd::dot(a, b);
  const double na_p = std::pow(na, p);

  InequalityCheck out;
  out.lhs = std::pow(nab, 2 + p);
  out.rhs = std::pow(na, 2 + p) + (2.0 + p) * inner * na_p + constants.C * na_p * nb * nb +
            constants.D * std::pow(nb, 2 + p);
  out.slack = out.rhs - out.lhs;
  out.holds = out.slack >= -1e-9 * std::max(1.0, out.rhs);
  return out;
}

RandomizedInequalitySummary randomized_inequality_check(int p, std::size_t dim,
                                                        std::size_t pairs,
                                                        std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
  auto engine = make_engine(seed, 11);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(dim), b(dim);
  RandomizedInequalitySummary summary{p, dim, pairs, 0, 0.0, seed};
  bool first = true;
  for (std::size_t i = 0; i < pairs; ++i) {
    for (auto& v : a) v = normal(engine);
    for (auto& v : b) v = normal(engine);
    const auto check = check_norm_power_inequality(a, b, p);
    if (!check.holds) ++summary.violations;
    const double relative = check.slack / std::max(1.0, check.rhs);
    summary.min_relative_slack = first ? relative : std::min(summary.min_relative_slack, relative);
    first = false;
  }
  return summary;
}

RecursionTrace recursion_bound_trace(double a, double b, double alpha, double beta,
                                     double z1, std::size_t n_max) {
  std::vector<std::string> violated;
  if (!(a > 0.0)) violated.emplace_back("a > 0");
  if (!(b >= 0.0)) violated.emplace_back("b >= 0");
  if (!(alpha > 0.0)) violated.emplace_back("alpha > 0");
  if (!(a <= std::pow(2.0, alpha))) violated.emplace_back("a <= 2^alpha");
  if (!(alpha <= 1.0)) violated.emplace_back("alpha <= 1");
  if (!(beta > 1.0 && beta < 2.0)) violated.emplace_back("1 < beta < 2");
  if (!(beta <= 2.0 * alpha)) violated.emplace_back("beta <= 2 alpha");
  if (alpha == 1.0 && !(beta < a + 1.0)) violated.emplace_back("beta < a + 1 when alpha = 1");
  if (!(z1 >= 0.0)) violated.emplace_back("z1 >= 0");
  if (n_max < 2) violated.emplace_back("n_max >= 2");
  if (!violated.empty()) {
    std::ostringstream os;
    os << "recursion parameters violate:";
    for (const auto& v : violated) os << ' ' << v << ';';
    throw std::invalid_argument(os.str());
  }

  RecursionTrace trace{a, b, alpha, beta, {}, 0.0, 0.0, false};
  trace.Z.reserve(n_max);
  trace.Z.push_back(z1);
  const double exponent = beta - alpha;
  std::vector<double> running_max(n_max);
  running_max[0] = z1;
  for (std::size_t n = 1; n < n_max; ++n) {
    const double next = static_cast<double>(n + 1);
    const double z = (1.0 - a / std::pow(next, alpha)) * trace.Z.back() + b / std::pow(next, beta);
    trace.Z.push_back(z);
    running_max[n] = std::max(running_max[n - 1], z * std::pow(next, exponent));
  }
  trace.sup_scaled = running_max.back();
  const double midpoint = running_max[n_max / 2];
  trace.late_growth = midpoint > 0.0 ? (trace.sup_scaled - midpoint) / midpoint : 0.0;
  trace.plateaued = std::isfinite(trace.sup_scaled) && trace.late_growth <= 0.01;
  return trace;
}

}  // namespace lsaga
