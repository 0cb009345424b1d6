#include "lsaga/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <type_traits>

#include "lsaga/appendix.hpp"
#include "lsaga/assumptions.hpp"
#include "lsaga/asymptotics.hpp"
#include "lsaga/dataset.hpp"
#include "lsaga/engine.hpp"
#include "lsaga/io.hpp"
#include "lsaga/simd.hpp"

namespace lsaga {

using nlohmann::json;

namespace {

// Config parsing

template <class T>
bool has_type(const json& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v.is_boolean();
  } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
    return v.is_number_unsigned();
  } else if constexpr (std::is_integral_v<T>) {
    return v.is_number_integer();
  } else if constexpr (std::is_floating_point_v<T>) {
    return v.is_number();
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v.is_string();
  } else {
    return true;
  }
}

template <class T>
const char* type_label() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) return "a non-negative integer";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

class Fields {
 public:
  Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "config" : prefix_, "expected an object");
  }

  std::string name(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    out = convert<T>(*it, name(key));
  }

  template <class T>
  void read(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
    } else {
      out = convert<T>(*it, name(key));
    }
  }

  template <class T>
  void read(const std::string& key, std::vector<T>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    out = convert_list<T>(*it, name(key));
  }

  void read(const std::string& key, std::optional<std::vector<double>>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
    } else {
      out = convert_list<double>(*it, name(key));
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(name(key), "unknown field");
    }
  }

 private:
  template <class T>
  static T convert(const json& v, const std::string& field) {
    if (!has_type<T>(v)) throw ConfigError(field, std::string("expected ") + type_label<T>());
    return v.get<T>();
  }

  template <class T>
  static std::vector<T> convert_list(const json& v, const std::string& field) {
    if (!v.is_array()) {
      // A scalar is accepted as a one-element list.
      return {convert<T>(v, field)};
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(convert<T>(v[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Validation

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

StepSchedule make_schedule(const ExperimentConfig& config) {
  require(config.c > 0.0, "c", "must be positive");
  require(config.alpha > 0.5 && config.alpha <= 1.0, "alpha", "must lie in (1/2, 1]");
  return StepSchedule::create(config.c, config.alpha);
}

void validate_lambdas(const ExperimentConfig& config) {
  require(!config.lambdas.empty(), "lambdas", "at least one value is required");
  for (double lambda : config.lambdas) {
    require(lambda >= 0.0 && lambda <= 1.0, "lambdas", "every value must lie in [0, 1]");
  }
}

void validate_problem(const ProblemConfig& p) {
  require(p.kind == "quadratic" || p.kind == "logistic-synthetic" || p.kind == "logistic-dataset",
          "problem.kind", "must be quadratic, logistic-synthetic or logistic-dataset");
  require(p.components >= 1, "problem.components", "must be at least 1");
  require(p.dim >= 1, "problem.dim", "must be at least 1");
  require(std::isfinite(p.scale) && p.scale > 0.0, "problem.scale", "must be positive");
  require(p.delimiter.size() == 1, "problem.delimiter", "must be a single character");
  if (p.kind == "logistic-dataset") {
    require(!p.dataset.empty(), "problem.dataset", "a path is required for logistic-dataset");
  }
}

void validate_common(const ExperimentConfig& config) {
  validate_problem(config.problem);
  require(config.workers >= 1, "workers", "must be at least 1");
}

Vector start_vector(const ExperimentConfig& config, const FiniteSumProblem& problem) {
  if (!config.x0) return Vector::Zero(static_cast<Eigen::Index>(problem.dim()));
  require(config.x0->size() == problem.dim(), "x0",
          "has " + std::to_string(config.x0->size()) + " entries, problem dimension is " +
              std::to_string(problem.dim()));
  return Eigen::Map<const Vector>(config.x0->data(), static_cast<Eigen::Index>(config.x0->size()));
}

// Output

std::filesystem::path make_output_dir(const ExperimentConfig& config, const std::string& name) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &utc);
  const auto base = std::filesystem::path(config.out_dir) / name;
  auto dir = base / stamp;
  for (int suffix = 2; std::filesystem::exists(dir); ++suffix) {
    dir = base / (std::string(stamp) + "-" + std::to_string(suffix));
  }
  std::filesystem::create_directories(dir);
  return dir;
}

json metadata(const ExperimentConfig& config, const std::string& name,
              const FiniteSumProblem* problem) {
  json j = {{"subcommand", name},
            {"version", LSAGA_VERSION},
            {"simd_backend", std::string(simd::backend_name(simd::active().backend))},
            {"config", to_json(config)}};
  if (problem) {
    j["problem"] = problem->descriptor();
    j["initialization"] = config.x0 ? "x0 from config" : "zero vector";
  }
  return j;
}

std::string lambda_tag(double lambda) { return "lambda_" + format_double(lambda); }

bool non_increasing(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1]) return false;
  }
  return true;
}

// Values ordered by increasing lambda.
std::vector<double> by_lambda(const std::vector<double>& lambdas, const std::vector<double>& values) {
  std::vector<std::size_t> order(lambdas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambdas[a] < lambdas[b]; });
  std::vector<double> out;
  for (std::size_t i : order) out.push_back(values[i]);
  return out;
}

}  // namespace

// Config

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  Fields top(j, "");
  if (const json* p = top.child("problem")) {
    Fields f(*p, "problem");
    auto& pc = config.problem;
    f.read("kind", pc.kind);
    f.read("components", pc.components);
    f.read("dim", pc.dim);
    f.read("seed", pc.seed);
    f.read("scale", pc.scale);
    f.read("dataset", pc.dataset);
    f.read("format", pc.format);
    f.read("label_rule", pc.label_rule);
    f.read("label_column", pc.label_column);
    f.read("delimiter", pc.delimiter);
    f.read("skip_header", pc.skip_header);
    f.read("max_rows", pc.max_rows);
    f.finish();
  }
  top.read("lambdas", config.lambdas);
  top.read("c", config.c);
  top.read("alpha", config.alpha);
  top.read("iters", config.iters);
  top.read("reps", config.reps);
  top.read("seed", config.seed);
  top.read("diag_every", config.diag_every);
  top.read("horizons", config.horizons);
  top.read("p_list", config.p_list);
  top.read("mu", config.mu);
  if (const json* c = top.child("checkpoints")) {
    Fields f(*c, "checkpoints");
    f.read("first", config.checkpoints.first);
    f.read("last", config.checkpoints.last);
    f.read("count", config.checkpoints.count);
    f.read("epoch_size", config.checkpoints.epoch_size);
    f.read("burn_in", config.checkpoints.burn_in);
    f.finish();
  }
  top.read("samples", config.samples);
  top.read("radius", config.radius);
  if (const json* l = top.child("lemmas")) {
    Fields f(*l, "lemmas");
    auto& lc = config.lemmas;
    f.read("max_p", lc.max_p);
    f.read("pairs", lc.pairs);
    f.read("dims", lc.dims);
    f.read("a", lc.a);
    f.read("b", lc.b);
    f.read("alpha", lc.alpha);
    f.read("beta", lc.beta);
    f.read("z1", lc.z1);
    f.read("n_max", lc.n_max);
    f.finish();
  }
  top.read("workers", config.workers);
  top.read("dump_points", config.dump_points);
  top.read("x0", config.x0);
  top.read("out_dir", config.out_dir);
  top.finish();
  return config;
}

json to_json(const ExperimentConfig& config) {
  const auto& p = config.problem;
  const auto& cp = config.checkpoints;
  const auto& l = config.lemmas;
  return {
      {"problem",
       {{"kind", p.kind},
        {"components", p.components},
        {"dim", p.dim},
        {"seed", p.seed},
        {"scale", p.scale},
        {"dataset", p.dataset},
        {"format", p.format},
        {"label_rule", p.label_rule},
        {"label_column", p.label_column},
        {"delimiter", p.delimiter},
        {"skip_header", p.skip_header},
        {"max_rows", p.max_rows ? json(*p.max_rows) : json(nullptr)}}},
      {"lambdas", config.lambdas},
      {"c", config.c},
      {"alpha", config.alpha},
      {"iters", config.iters},
      {"reps", config.reps},
      {"seed", config.seed},
      {"diag_every", config.diag_every},
      {"horizons", config.horizons},
      {"p_list", config.p_list},
      {"mu", optional_json(config.mu)},
      {"checkpoints",
       {{"first", cp.first},
        {"last", cp.last},
        {"count", cp.count},
        {"epoch_size", cp.epoch_size},
        {"burn_in", cp.burn_in}}},
      {"samples", config.samples},
      {"radius", config.radius},
      {"lemmas",
       {{"max_p", l.max_p},
        {"pairs", l.pairs},
        {"dims", l.dims},
        {"a", l.a},
        {"b", l.b},
        {"alpha", l.alpha},
        {"beta", l.beta},
        {"z1", l.z1},
        {"n_max", l.n_max}}},
      {"workers", config.workers},
      {"dump_points", config.dump_points},
      {"x0", config.x0 ? json(*config.x0) : json(nullptr)},
      {"out_dir", config.out_dir},
  };
}

json load_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config", "file not found: " + path.string());
  std::ifstream in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", "cannot parse " + path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("subcommand")) return j.at("config");
  return j;
}

// Problems

std::unique_ptr<FiniteSumProblem> build_problem(const ProblemConfig& p) {
  validate_problem(p);
  if (p.kind == "quadratic") {
    return std::make_unique<QuadraticProblem>(
        QuadraticProblem::random(p.components, p.dim, p.seed, p.scale));
  }
  if (p.kind == "logistic-synthetic") {
    return std::make_unique<LogisticProblem>(
        LogisticProblem::synthetic(p.components, p.dim, p.seed, p.scale));
  }
  DatasetOptions options;
  options.delimiter = p.delimiter.front();
  options.label_column = p.label_column;
  options.skip_header = p.skip_header;
  options.feature_scale = p.scale;
  options.max_rows = p.max_rows;
  DatasetFormat format;
  LabelRule rule;
  try {
    format = parse_dataset_format(p.format);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem.format", e.what());
  }
  try {
    rule = parse_label_rule(p.label_rule);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem.label_rule", e.what());
  }
  return std::make_unique<LogisticProblem>(load_dataset(p.dataset, format, rule, options));
}

Vector reference_point(const FiniteSumProblem& problem) {
  return solve_minimizer(problem).x;
}

// Commands

CommandResult cmd_run(const ExperimentConfig& config, std::ostream& log) {
  validate_common(config);
  validate_lambdas(config);
  const auto schedule = make_schedule(config);
  require(config.iters >= 1, "iters", "must be at least 1");
  require(config.diag_every >= 1, "diag_every", "cadence must be positive");

  const auto problem = build_problem(config.problem);
  RunOptions options;
  options.x0 = start_vector(config, *problem);

  CommandResult result;
  json warnings = json::array();
  std::optional<Vector> x_ref;
  try {
    x_ref = reference_point(*problem);
  } catch (const NewtonError& e) {
    warnings.push_back(std::string("no reference minimizer, diagnostics limited to grad_eval_norm: ") +
                       e.what());
  }

  result.output_dir = make_output_dir(config, "run");
  json meta = metadata(config, "run", problem.get());
  meta["runs"] = json::array();

  json runs = json::array();
  std::string combined = "lambda,n,V_n,A_n,tau2,T_n,grad_eval_norm,value_gap\n";
  std::vector<double> done_lambdas, final_norms;
  for (double lambda : config.lambdas) {
    log << "run " << problem->descriptor() << " lambda=" << lambda << " iters=" << config.iters
        << std::endl;
    try {
      const auto trace =
          run(*problem, lambda, schedule, config.iters, config.seed, config.diag_every, x_ref, options);
      const std::string csv = trace_csv(trace);
      const std::string file = "trace_" + lambda_tag(lambda) + ".csv";
      write_text(result.output_dir / file, csv);
      std::istringstream lines(csv);
      std::string line;
      std::getline(lines, line);
      while (std::getline(lines, line)) combined += format_double(lambda) + "," + line + "\n";

      const auto& last = trace.snapshots.back();
      json entry = {{"lambda", lambda},
                    {"file", file},
                    {"iterations", config.iters},
                    {"final_grad_eval_norm", last.grad_eval_norm},
                    {"final_iterate", to_json(trace.final_iterate)}};
      if (last.diagnostics) {
        entry["final_V"] = last.diagnostics->V;
        entry["final_value_gap"] = last.diagnostics->value_gap;
      }
      runs.push_back(entry);
      meta["runs"].push_back(trace_metadata(trace, problem->descriptor()));
      done_lambdas.push_back(lambda);
      final_norms.push_back(last.grad_eval_norm);
      log << "  final grad_eval_norm " << last.grad_eval_norm << " (" << trace.wall_seconds
          << " s)" << std::endl;
    } catch (const std::exception& e) {
      log << "  failed: " << e.what() << std::endl;
      runs.push_back({{"lambda", lambda}, {"error", e.what()}});
      result.exit_code = 1;
    }
  }
  write_text(result.output_dir / "traces.csv", combined);

  result.summary = {{"subcommand", "run"},
                    {"problem", problem->descriptor()},
                    {"schedule", to_json(schedule)},
                    {"seed", config.seed},
                    {"reference_point", x_ref ? to_json(*x_ref) : json(nullptr)},
                    {"runs", runs},
                    {"grad_eval_norm_nonincreasing_in_lambda",
                     non_increasing(by_lambda(done_lambdas, final_norms))},
                    {"warnings", warnings}};
  write_json(result.output_dir / "metadata.json", meta);
  write_json(result.output_dir / "summary.json", result.summary);
  return result;
}

CommandResult cmd_clt(const ExperimentConfig& config, std::ostream& log) {
  validate_common(config);
  validate_lambdas(config);
  if (config.c != 1.0 || config.alpha != 1.0) {
    std::ostringstream os;
    os << "the central limit result is stated for gamma_n = 1/n only (c = 1, alpha = 1); got c = "
       << config.c << ", alpha = " << config.alpha;
    throw ConfigError(config.c != 1.0 ? "c" : "alpha", os.str());
  }
  require(config.reps >= 2, "reps", "at least 2 replications are required");
  require(!config.horizons.empty(), "horizons", "at least one horizon n is required");
  for (auto n : config.horizons) require(n >= 1, "horizons", "every horizon must be at least 1");

  const auto problem = build_problem(config.problem);
  const Vector x_ref = reference_point(*problem);

  std::optional<Matrix> gamma;
  std::optional<double> rho;
  json theory = nullptr;
  if (auto h = problem->hessian(view(x_ref))) {
    gamma = gamma_matrix(*problem, x_ref);
    rho = min_eigenvalue(*h);
    theory = {{"H", to_json(*h)}, {"Gamma", to_json(*gamma)}, {"rho", *rho}};
  }

  EnsembleOptions options;
  options.workers = config.workers;
  options.x0 = start_vector(config, *problem);
  options.keep_points = config.dump_points;

  CommandResult result;
  result.output_dir = make_output_dir(config, "clt");
  json summaries = json::array();
  std::string table = "n,lambda,sigma2_scalar,stderr,ratio_to_lambda0,expected_ratio\n";
  json notes = json::array();

  for (auto n : config.horizons) {
    std::optional<double> base;
    std::vector<std::pair<double, MonteCarloSummary>> rows;
    for (double lambda : config.lambdas) {
      log << "clt n=" << n << " lambda=" << lambda << " M=" << config.reps << std::endl;
      auto summary = clt_ensemble(*problem, lambda, n, config.reps, config.seed, x_ref, options);
      json entry = to_json(summary);
      if (theory.is_object() && *rho > 0.5) {
        const auto cov = solve_lyapunov(*problem->hessian(view(x_ref)), *gamma, lambda);
        entry["sigma_theory"] = to_json(cov.Sigma);
        entry["sigma2_scalar_theory"] = cov.Sigma.sum();
        const double norm = cov.Sigma.norm();
        entry["relative_frobenius_error"] =
            norm > 0.0 ? json((summary.sample_cov - cov.Sigma).norm() / norm) : json(nullptr);
      }
      if (config.dump_points) {
        const std::string file = "points_n_" + std::to_string(n) + "_" + lambda_tag(lambda) + ".csv";
        write_text(result.output_dir / file, points_csv(summary.points));
        entry["points_file"] = file;
      }
      summaries.push_back(entry);
      if (lambda == 0.0) base = summary.sigma2_scalar;
      log << "  sigma2_scalar " << summary.sigma2_scalar << " +- " << summary.stderr_sigma2
          << std::endl;
      rows.emplace_back(lambda, std::move(summary));
    }
    for (const auto& [lambda, summary] : rows) {
      table += std::to_string(n) + "," + format_double(lambda) + "," +
               format_double(summary.sigma2_scalar) + "," + format_double(summary.stderr_sigma2) + ",";
      if (base && lambda < 1.0 && *base > 0.0) table += format_double(summary.sigma2_scalar / *base);
      table += "," + format_double((1.0 - lambda) * (1.0 - lambda)) + "\n";
    }
  }
  if (std::find(config.lambdas.begin(), config.lambdas.end(), 1.0) != config.lambdas.end()) {
    notes.push_back("lambda = 1: the limiting covariance is zero and the variance shrinks with n; "
                    "no ratio is reported");
  }
  if (std::find(config.lambdas.begin(), config.lambdas.end(), 0.0) == config.lambdas.end()) {
    notes.push_back("lambda = 0 not requested; ratios to sigma2(0) are left empty");
  }
  if (rho && *rho <= 0.5) {
    notes.push_back("minimum Hessian eigenvalue " + format_double(*rho) +
                    " <= 1/2: no limiting covariance to compare against");
  }

  write_text(result.output_dir / "scaling.csv", table);
  result.summary = {{"subcommand", "clt"},
                    {"problem", problem->descriptor()},
                    {"reference_point", to_json(x_ref)},
                    {"theory", theory},
                    {"summaries", summaries},
                    {"notes", notes}};
  write_json(result.output_dir / "metadata.json", metadata(config, "clt", problem.get()));
  write_json(result.output_dir / "summary.json", result.summary);
  return result;
}

CommandResult cmd_rates(const ExperimentConfig& config, std::ostream& log) {
  validate_common(config);
  validate_lambdas(config);
  const auto schedule = make_schedule(config);
  require(config.reps >= 1, "reps", "at least 1 replication is required");
  require(!config.p_list.empty(), "p_list", "at least one moment order is required");
  for (int p : config.p_list) require(p >= 1, "p_list", "every p must be at least 1");
  const auto& cp = config.checkpoints;
  require(cp.first >= 1, "checkpoints.first", "must be at least 1");
  require(cp.last >= cp.first, "checkpoints.last", "must not be below checkpoints.first");
  require(cp.count >= 2, "checkpoints.count", "slope undefined: at least two checkpoints are required");
  if (config.mu) require(*config.mu > 0.0, "mu", "must be positive");

  const std::uint64_t unit = cp.epoch_size > 0 ? cp.epoch_size : 1;
  const auto checkpoints = log_checkpoints(cp.first * unit, cp.last * unit, cp.count);
  require(checkpoints.size() >= 2, "checkpoints", "slope undefined: fewer than two distinct checkpoints");

  const auto problem = build_problem(config.problem);
  const Vector x_ref = reference_point(*problem);

  RateOptions options;
  options.workers = config.workers;
  options.mu = config.mu;
  options.burn_in = cp.burn_in;
  options.x0 = start_vector(config, *problem);
  json notes = json::array();
  if (!options.mu && config.problem.kind == "quadratic") {
    options.mu = 1.0;
    notes.push_back("mu = 1 (identity Hessian)");
  }

  CommandResult result;
  result.output_dir = make_output_dir(config, "rates");
  std::string csv = "lambda,p,n,epoch,moment,value_gap_moment\n";
  json estimates = json::array();
  json ordering = json::object();

  for (int p : config.p_list) {
    std::vector<double> finals;
    for (double lambda : config.lambdas) {
      log << "rates p=" << p << " lambda=" << lambda << " M=" << config.reps << std::endl;
      const auto est = rate_ensemble(*problem, lambda, schedule, p, checkpoints, config.reps,
                                     config.seed, x_ref, options);
      for (const auto& w : est.warnings) log << "  warning: " << w << std::endl;
      if (est.fit) {
        log << "  slope " << est.fit->slope << " +- " << est.fit->half_width << std::endl;
      }
      for (std::size_t i = 0; i < est.checkpoints.size(); ++i) {
        csv += format_double(lambda) + "," + std::to_string(p) + "," +
               std::to_string(est.checkpoints[i]) + "," +
               format_double(static_cast<double>(est.checkpoints[i]) / static_cast<double>(unit)) +
               "," + format_double(est.moments[i]) + "," + format_double(est.value_gap_moments[i]) +
               "\n";
      }
      json entry = to_json(est);
      entry["expected_slope"] = -static_cast<double>(p) * config.alpha;
      estimates.push_back(entry);
      finals.push_back(est.moments.back());
    }
    ordering[std::to_string(p)] = non_increasing(by_lambda(config.lambdas, finals));
  }

  write_text(result.output_dir / "moments.csv", csv);
  result.summary = {{"subcommand", "rates"},
                    {"problem", problem->descriptor()},
                    {"reference_point", to_json(x_ref)},
                    {"epoch_size", cp.epoch_size},
                    {"estimates", estimates},
                    {"final_moment_nonincreasing_in_lambda", ordering},
                    {"notes", notes}};
  write_json(result.output_dir / "metadata.json", metadata(config, "rates", problem.get()));
  write_json(result.output_dir / "summary.json", result.summary);
  return result;
}

CommandResult cmd_check(const ExperimentConfig& config, std::ostream& log) {
  validate_common(config);
  require(!config.p_list.empty(), "p_list", "at least one moment order is required");
  for (int p : config.p_list) require(p >= 1, "p_list", "every p must be at least 1");
  require(config.samples >= 1, "samples", "must be at least 1");
  require(config.radius > 0.0, "radius", "must be positive");

  const auto problem = build_problem(config.problem);
  const Vector x_ref = reference_point(*problem);
  const auto report =
      check_assumptions(*problem, config.p_list, config.samples, config.seed, x_ref, config.radius);

  const auto yes_no = [](bool v) { return v ? "yes" : "NO"; };
  log << problem->descriptor() << "\n";
  log << "  ||grad f(x*)||      " << report.gradient_norm_at_optimum << "\n";
  log << "  rho                 " << (report.rho ? format_double(*report.rho) : "n/a") << "\n";
  log << "  L                   " << (report.L ? format_double(*report.L) : "n/a") << "\n";
  for (const auto& lp : report.Lp) {
    log << "  L_" << lp.p << "                 "
        << (lp.constant ? format_double(*lp.constant) : "n/a") << " (violations " << lp.violations
        << ", worst ratio " << lp.worst_ratio << ")\n";
  }
  log << "  mu estimate         " << report.mu_estimate << " (sampled, not a certificate)\n";
  const auto& f = report.flags;
  log << "  equilibrium         " << yes_no(f.equilibrium) << "\n";
  log << "  positive secant     " << yes_no(f.positive_secant) << "\n";
  log << "  Lipschitz at x*     " << yes_no(f.lipschitz_at_optimum) << "\n";
  log << "  rho > 1/2           " << (f.curvature ? yes_no(*f.curvature) : "n/a") << "\n";
  log << "  restricted secant   " << yes_no(f.restricted_secant) << "\n";
  for (std::size_t i = 0; i < f.moment_lipschitz.size(); ++i) {
    log << "  L_" << report.Lp[i].p << " bound          " << yes_no(f.moment_lipschitz[i]) << "\n";
  }
  log.flush();

  CommandResult result;
  result.output_dir = make_output_dir(config, "check");
  result.summary = to_json(report);
  result.summary["subcommand"] = "check";
  result.summary["problem"] = problem->descriptor();
  result.summary["reference_point"] = to_json(x_ref);
  std::string csv = "p,L_p,violations,worst_ratio\n";
  for (const auto& lp : report.Lp) {
    csv += std::to_string(lp.p) + "," + (lp.constant ? format_double(*lp.constant) : "") + "," +
           std::to_string(lp.violations) + "," + format_double(lp.worst_ratio) + "\n";
  }
  write_text(result.output_dir / "lipschitz.csv", csv);
  write_json(result.output_dir / "metadata.json", metadata(config, "check", problem.get()));
  write_json(result.output_dir / "summary.json", result.summary);
  return result;
}

CommandResult cmd_lemmas(const ExperimentConfig& config, std::ostream& log) {
  const auto& l = config.lemmas;
  require(l.max_p >= 2 && l.max_p % 2 == 0, "lemmas.max_p", "must be an even integer >= 2");
  require(l.pairs >= 1, "lemmas.pairs", "must be at least 1");
  require(!l.dims.empty(), "lemmas.dims", "at least one dimension is required");
  for (auto d : l.dims) require(d >= 1, "lemmas.dims", "every dimension must be at least 1");
  require(l.n_max >= 2, "lemmas.n_max", "must be at least 2");

  CommandResult result;
  json constants = json::array();
  std::string constants_csv = "p,C_p,D_p\n";
  for (int p = 2; p <= l.max_p; p += 2) {
    const auto c = cp_dp(p);
    constants.push_back(to_json(c));
    constants_csv += std::to_string(p) + "," + format_double(c.C) + "," + format_double(c.D) + "\n";
    log << "C_" << p << " = " << c.C << ", D_" << p << " = " << c.D << "\n";
  }

  json checks = json::array();
  std::string checks_csv = "p,dim,pairs,violations,min_relative_slack\n";
  for (int p = 2; p <= l.max_p; p += 2) {
    for (auto d : l.dims) {
      const auto s = randomized_inequality_check(p, d, l.pairs, config.seed);
      checks.push_back(to_json(s));
      checks_csv += std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(s.pairs) +
                    "," + std::to_string(s.violations) + "," + format_double(s.min_relative_slack) +
                    "\n";
      log << "norm-power inequality p=" << p << " d=" << d << ": " << s.violations << " violations in "
          << s.pairs << " pairs\n";
      if (s.violations > 0) result.exit_code = 1;
    }
  }

  RecursionTrace trace;
  try {
    trace = recursion_bound_trace(l.a, l.b, l.alpha, l.beta, l.z1, l.n_max);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("lemmas", e.what());
  }
  log << "recursion bound: sup Z_n n^(beta-alpha) = " << trace.sup_scaled << ", late growth "
      << trace.late_growth << (trace.plateaued ? " (plateaued)" : " (NOT plateaued)") << std::endl;
  if (!trace.plateaued) result.exit_code = 1;
  std::string trace_csv = "n,Z_n,scaled\n";
  for (auto n : log_checkpoints(1, l.n_max, 1000)) {
    const double z = trace.Z[n - 1];
    trace_csv += std::to_string(n) + "," + format_double(z) + "," +
                 format_double(z * std::pow(static_cast<double>(n), l.beta - l.alpha)) + "\n";
  }

  result.output_dir = make_output_dir(config, "lemmas");
  result.summary = {{"subcommand", "lemmas"},
                    {"constants", constants},
                    {"inequality_checks", checks},
                    {"recursion", to_json(trace)}};
  write_text(result.output_dir / "constants.csv", constants_csv);
  write_text(result.output_dir / "inequality.csv", checks_csv);
  write_text(result.output_dir / "recursion.csv", trace_csv);
  write_json(result.output_dir / "metadata.json", metadata(config, "lemmas", nullptr));
  write_json(result.output_dir / "summary.json", result.summary);
  return result;
}

}  // namespace lsaga
