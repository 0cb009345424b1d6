// lsaga: command-line front end for the lambda-SAGA experiments.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lsaga/dataset.hpp"
#include "lsaga/experiment.hpp"

using nlohmann::json;

namespace {

struct Overrides {
  std::string config_path;
  bool quiet = false;
  std::vector<double> lambdas;
  std::optional<double> c, alpha, mu, scale, radius;
  std::optional<std::uint64_t> iters, reps, seed, diag_every, problem_seed, first, last, count,
      epoch_size, burn_in, samples, pairs, n_max, components, dim, max_rows, label_column;
  std::optional<unsigned> workers;
  std::optional<int> max_p;
  std::vector<std::uint64_t> horizons, lemma_dims;
  std::vector<int> p_list;
  std::vector<double> x0;
  std::optional<std::string> dataset, format, out_dir, kind, label_rule, delimiter;
  bool skip_header = false, dump_points = false;
};

void add_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (or a previous metadata.json)");
  cmd->add_flag("-q,--quiet", o.quiet, "Suppress progress output");
  cmd->add_option("--lambda", o.lambdas, "Interpolation parameter; repeat for a list")
      ->delimiter(',');
  cmd->add_option("--c", o.c, "Step-size scale c in gamma_n = c / n^alpha");
  cmd->add_option("--alpha", o.alpha, "Step-size decay exponent in (1/2, 1]");
  cmd->add_option("--iters", o.iters, "Iterations per run");
  cmd->add_option("--reps", o.reps, "Monte-Carlo replications");
  cmd->add_option("--seed", o.seed, "Base seed for sampling");
  cmd->add_option("--diag-every", o.diag_every, "Diagnostics cadence in iterations");
  cmd->add_option("--dataset", o.dataset, "Dataset path (selects problem kind logistic-dataset)");
  cmd->add_option("--format", o.format, "Dataset format: dense-csv or svmlight");
  cmd->add_option("--out-dir", o.out_dir, "Output root directory");
  cmd->add_option("--workers", o.workers, "Worker threads for ensembles");
  cmd->add_option("--problem", o.kind, "quadratic, logistic-synthetic or logistic-dataset");
  cmd->add_option("--components", o.components, "N for synthetic problems");
  cmd->add_option("--dim", o.dim, "Dimension for synthetic problems");
  cmd->add_option("--problem-seed", o.problem_seed, "Seed for synthetic problem data");
  cmd->add_option("--scale", o.scale, "Anchor spread or feature scale");
  cmd->add_option("--label-rule", o.label_rule, "binary, digit-split or plus-minus-one");
  cmd->add_option("--label-column", o.label_column, "Label column for dense-csv");
  cmd->add_option("--delimiter", o.delimiter, "Field delimiter for dense-csv");
  cmd->add_flag("--skip-header", o.skip_header, "First dense-csv line is a header");
  cmd->add_option("--max-rows", o.max_rows, "Keep only the first rows of the dataset");
  cmd->add_option("--x0", o.x0, "Initial point (comma separated)")->delimiter(',');
}

void add_clt_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--horizon", o.horizons, "Horizon n; repeat for a list")->delimiter(',');
  cmd->add_flag("--dump-points", o.dump_points, "Write per-replication sqrt(n)(X_n - x*)");
}

void add_rate_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--p", o.p_list, "Moment order; repeat for a list")->delimiter(',');
  cmd->add_option("--mu", o.mu, "Restricted secant constant for the condition check");
  cmd->add_option("--first", o.first, "First checkpoint");
  cmd->add_option("--last", o.last, "Last checkpoint");
  cmd->add_option("--count", o.count, "Number of log-spaced checkpoints");
  cmd->add_option("--epoch-size", o.epoch_size, "Interpret --first/--last in epochs of this many iterations");
  cmd->add_option("--burn-in", o.burn_in, "Checkpoints below this are not fitted");
}

void add_check_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--p", o.p_list, "Moment order; repeat for a list")->delimiter(',');
  cmd->add_option("--samples", o.samples, "Sampled points");
  cmd->add_option("--radius", o.radius, "Sampling radius around x*");
}

void add_lemma_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--max-p", o.max_p, "Largest even p in the constant table");
  cmd->add_option("--pairs", o.pairs, "Random vector pairs per (p, dimension)");
  cmd->add_option("--lemma-dim", o.lemma_dims, "Vector dimension; repeat for a list")->delimiter(',');
  cmd->add_option("--n-max", o.n_max, "Length of the recursion trace");
}

template <class T>
void set(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

json merged_config(const Overrides& o) {
  json j = o.config_path.empty() ? json::object() : lsaga::load_config_file(o.config_path);
  if (!j.is_object()) throw lsaga::ConfigError("config", "expected an object");
  json& p = j["problem"];
  if (p.is_null()) p = json::object();
  if (o.dataset && !o.kind) p["kind"] = "logistic-dataset";
  set(p, "kind", o.kind);
  set(p, "dataset", o.dataset);
  set(p, "format", o.format);
  set(p, "components", o.components);
  set(p, "dim", o.dim);
  set(p, "seed", o.problem_seed);
  set(p, "scale", o.scale);
  set(p, "label_rule", o.label_rule);
  set(p, "label_column", o.label_column);
  set(p, "delimiter", o.delimiter);
  set(p, "max_rows", o.max_rows);
  if (o.skip_header) p["skip_header"] = true;

  if (!o.lambdas.empty()) j["lambdas"] = o.lambdas;
  set(j, "c", o.c);
  set(j, "alpha", o.alpha);
  set(j, "iters", o.iters);
  set(j, "reps", o.reps);
  set(j, "seed", o.seed);
  set(j, "diag_every", o.diag_every);
  set(j, "workers", o.workers);
  set(j, "out_dir", o.out_dir);
  set(j, "mu", o.mu);
  set(j, "samples", o.samples);
  set(j, "radius", o.radius);
  if (!o.horizons.empty()) j["horizons"] = o.horizons;
  if (!o.p_list.empty()) j["p_list"] = o.p_list;
  if (!o.x0.empty()) j["x0"] = o.x0;
  if (o.dump_points) j["dump_points"] = true;

  if (o.first || o.last || o.count || o.epoch_size || o.burn_in) {
    json& c = j["checkpoints"];
    if (c.is_null()) c = json::object();
    set(c, "first", o.first);
    set(c, "last", o.last);
    set(c, "count", o.count);
    set(c, "epoch_size", o.epoch_size);
    set(c, "burn_in", o.burn_in);
  }
  if (o.max_p || o.pairs || o.n_max || !o.lemma_dims.empty()) {
    json& l = j["lemmas"];
    if (l.is_null()) l = json::object();
    set(l, "max_p", o.max_p);
    set(l, "pairs", o.pairs);
    set(l, "n_max", o.n_max);
    if (!o.lemma_dims.empty()) l["dims"] = o.lemma_dims;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lambda-SAGA experiments: runs, CLT ensembles, rate estimates, assumption checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LSAGA_VERSION);

  Overrides o;
  using Command = std::function<lsaga::CommandResult(const lsaga::ExperimentConfig&, std::ostream&)>;
  std::map<CLI::App*, Command> commands;

  auto* run = app.add_subcommand("run", "Single runs per lambda with diagnostics traces");
  add_options(run, o);
  commands[run] = lsaga::cmd_run;

  auto* clt = app.add_subcommand("clt", "Ensembles of sqrt(n)(X_n - x*) under gamma_n = 1/n");
  add_options(clt, o);
  add_clt_options(clt, o);
  commands[clt] = lsaga::cmd_clt;

  auto* rates = app.add_subcommand("rates", "Monte-Carlo moment decay and log-log slopes");
  add_options(rates, o);
  add_rate_options(rates, o);
  commands[rates] = lsaga::cmd_rates;

  auto* check = app.add_subcommand("check", "Numerical probe of the standing assumptions");
  add_options(check, o);
  add_check_options(check, o);
  commands[check] = lsaga::cmd_check;

  auto* lemmas = app.add_subcommand("lemmas", "Norm-power constants, inequality and recursion checks");
  lemmas->add_option("--config", o.config_path, "JSON config file");
  lemmas->add_flag("-q,--quiet", o.quiet, "Suppress progress output");
  lemmas->add_option("--seed", o.seed, "Seed for random vector pairs");
  lemmas->add_option("--out-dir", o.out_dir, "Output root directory");
  add_lemma_options(lemmas, o);
  commands[lemmas] = lsaga::cmd_lemmas;

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = lsaga::config_from_json(merged_config(o));
    std::ostringstream sink;
    std::ostream& log = o.quiet ? static_cast<std::ostream&>(sink) : std::cerr;
    for (const auto& [cmd, fn] : commands) {
      if (!cmd->parsed()) continue;
      const auto result = fn(config, log);
      std::cout << result.output_dir.string() << std::endl;
      return result.exit_code;
    }
  } catch (const lsaga::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 1;
}
