#include "lsaga/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace lsaga {

using nlohmann::json;

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

json to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix data length does not match rows * cols");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)];
  return m;
}

json to_json(const StepSchedule& schedule) {
  return {{"c", schedule.c()}, {"alpha", schedule.alpha()}};
}

json to_json(const RateConditionReport& report) {
  return {{"p", report.p},
          {"mu", report.mu},
          {"l2_rate_ok", report.l2_rate_ok},
          {"l2p_rate_ok", report.l2p_rate_ok},
          {"messages", report.messages}};
}

json to_json(const AssumptionReport& report) {
  json lp = json::array();
  for (const auto& check : report.Lp) {
    lp.push_back({{"p", check.p},
                  {"L_p", check.constant ? json(*check.constant) : json(nullptr)},
                  {"violations", check.violations},
                  {"worst_ratio", check.worst_ratio}});
  }
  const auto& f = report.flags;
  return {
      {"samples", report.samples},
      {"radius", report.radius},
      {"seed", report.seed},
      {"gradient_norm_at_optimum", report.gradient_norm_at_optimum},
      {"L", report.L ? json(*report.L) : json(nullptr)},
      {"L_p", lp},
      {"rho", report.rho ? json(*report.rho) : json(nullptr)},
      {"mu_estimate", report.mu_estimate},
      {"satisfied",
       {{"equilibrium", f.equilibrium},
        {"positive_secant", f.positive_secant},
        {"lipschitz_at_optimum", f.lipschitz_at_optimum},
        {"curvature_rho_gt_half", f.curvature ? json(*f.curvature) : json(nullptr)},
        {"restricted_secant", f.restricted_secant},
        {"moment_lipschitz", f.moment_lipschitz}}},
  };
}

json to_json(const MonteCarloSummary& summary) {
  json j = {{"M", summary.M},
            {"n", summary.n},
            {"lambda", summary.lambda},
            {"base_seed", summary.base_seed},
            {"mean", to_json(summary.mean)},
            {"sample_cov", to_json(summary.sample_cov)},
            {"sigma2_scalar", summary.sigma2_scalar},
            {"stderr", summary.stderr_sigma2}};
  return j;
}

namespace {
json fit_json(const std::optional<SlopeFit>& fit) {
  if (!fit) return nullptr;
  return {{"slope", fit->slope}, {"intercept", fit->intercept}, {"ci_half_width", fit->half_width}};
}
}  // namespace

json to_json(const RateEstimate& est) {
  return {{"p", est.p},
          {"alpha", est.alpha},
          {"c", est.c},
          {"lambda", est.lambda},
          {"M", est.M},
          {"base_seed", est.base_seed},
          {"checkpoints", est.checkpoints},
          {"moments", est.moments},
          {"value_gap_moments", est.value_gap_moments},
          {"fit", fit_json(est.fit)},
          {"value_gap_fit", fit_json(est.value_gap_fit)},
          {"bounded_ratio", est.bounded_ratio},
          {"conditions", est.conditions ? to_json(*est.conditions) : json(nullptr)},
          {"warnings", est.warnings}};
}

json to_json(const NormPowerConstants& constants) {
  return {{"p", constants.p}, {"C_p", constants.C}, {"D_p", constants.D}};
}

json to_json(const RandomizedInequalitySummary& summary) {
  return {{"p", summary.p},
          {"dim", summary.dim},
          {"pairs", summary.pairs},
          {"violations", summary.violations},
          {"min_relative_slack", summary.min_relative_slack},
          {"seed", summary.seed}};
}

json to_json(const RecursionTrace& trace) {
  return {{"a", trace.a},
          {"b", trace.b},
          {"alpha", trace.alpha},
          {"beta", trace.beta},
          {"z1", trace.Z.empty() ? 0.0 : trace.Z.front()},
          {"n_max", trace.Z.size()},
          {"final_Z", trace.Z.empty() ? 0.0 : trace.Z.back()},
          {"sup_scaled", trace.sup_scaled},
          {"late_growth", trace.late_growth},
          {"plateaued", trace.plateaued}};
}

json trace_metadata(const RunTrace& trace, const std::string& problem) {
  return {{"problem", problem},
          {"schedule", to_json(trace.schedule)},
          {"lambda", trace.lambda},
          {"seed", trace.seed},
          {"iterations", trace.iterations},
          {"diag_every", trace.diag_every},
          {"x0", to_json(trace.initial_table_point)},
          {"x1", to_json(trace.initial_iterate)},
          {"final_iterate", to_json(trace.final_iterate)},
          {"wall_seconds", trace.wall_seconds}};
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = "n,V_n,A_n,tau2,T_n,grad_eval_norm,value_gap\n";
  for (const auto& snap : trace.snapshots) {
    out += std::to_string(snap.n);
    if (snap.diagnostics) {
      const auto& d = *snap.diagnostics;
      for (double v : {d.V, d.A, d.tau2, d.T}) out += ',' + format_double(v);
      out += ',' + format_double(snap.grad_eval_norm);
      out += ',' + format_double(d.value_gap);
    } else {
      out += ",,,,," + format_double(snap.grad_eval_norm) + ',';
    }
    out += '\n';
  }
  return out;
}

std::string points_csv(const Matrix& points) {
  std::string out = "replication";
  for (Eigen::Index j = 0; j < points.cols(); ++j) out += ",x_" + std::to_string(j + 1);
  out += '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out += std::to_string(i);
    for (Eigen::Index j = 0; j < points.cols(); ++j) out += ',' + format_double(points(i, j));
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace lsaga
