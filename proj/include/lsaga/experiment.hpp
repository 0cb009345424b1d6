#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsaga/problems.hpp"

namespace lsaga {

/// Invalid configuration; the message starts with the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ProblemConfig {
  std::string kind = "quadratic";  // quadratic, logistic-synthetic, logistic-dataset
  std::size_t components = 20;     // N for synthetic problems
  std::size_t dim = 2;
  std::uint64_t seed = 1;
  double scale = 1.0;              // anchor spread or feature scale
  std::string dataset;             // logistic-dataset only
  std::string format = "dense-csv";
  std::string label_rule = "digit-split";
  std::size_t label_column = 0;
  std::string delimiter = ",";
  bool skip_header = false;
  std::optional<std::size_t> max_rows;
};

struct CheckpointConfig {
  std::uint64_t first = 1000;
  std::uint64_t last = 100000;
  std::size_t count = 9;
  std::uint64_t epoch_size = 0;  // when positive, first and last count epochs
  std::uint64_t burn_in = 100;
};

struct LemmaConfig {
  int max_p = 6;
  std::size_t pairs = 100000;
  std::vector<std::size_t> dims{1, 3, 10};
  double a = 1.0;
  double b = 1.0;
  double alpha = 1.0;
  double beta = 1.5;
  double z1 = 1.0;
  std::size_t n_max = 100000;
};

/// Every parameter of every subcommand. Serialises to JSON and back without
/// loss; the echo in metadata.json reproduces the run.
struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<double> lambdas{0.0, 0.5, 0.9, 1.0};
  double c = 1.0;
  double alpha = 1.0;
  std::uint64_t iters = 100000;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  std::uint64_t diag_every = 1000;
  std::vector<std::uint64_t> horizons{100000};  // clt
  std::vector<int> p_list{1};                   // rates, check
  std::optional<double> mu;
  CheckpointConfig checkpoints;
  std::size_t samples = 1000;  // check
  double radius = 1.0;         // check
  LemmaConfig lemmas;
  unsigned workers = 1;
  bool dump_points = false;    // clt: per-replication CSV
  std::optional<std::vector<double>> x0;
  std::string out_dir = "runs";
};

/// Unknown keys and ill-typed values are rejected with the field name.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

/// Reads a config file. A metadata.json written by a previous run is accepted
/// and its "config" member used.
nlohmann::json load_config_file(const std::filesystem::path& path);

std::unique_ptr<FiniteSumProblem> build_problem(const ProblemConfig& config);

/// Reference minimizer: closed form or Newton.
Vector reference_point(const FiniteSumProblem& problem);

struct CommandResult {
  int exit_code = 0;
  std::filesystem::path output_dir;
  nlohmann::json summary;
};

/// Each command validates the parts of the config it uses, writes
/// <out_dir>/<name>/<timestamp>/{metadata.json, *.csv, summary.json} and logs
/// progress to `log`.
CommandResult cmd_run(const ExperimentConfig& config, std::ostream& log);
CommandResult cmd_clt(const ExperimentConfig& config, std::ostream& log);
CommandResult cmd_rates(const ExperimentConfig& config, std::ostream& log);
CommandResult cmd_check(const ExperimentConfig& config, std::ostream& log);
CommandResult cmd_lemmas(const ExperimentConfig& config, std::ostream& log);

}  // namespace lsaga
