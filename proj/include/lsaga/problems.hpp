#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsaga/types.hpp"

namespace lsaga {

/// f(x) = (1/N) sum_k f_k(x). Component indices are zero-based.
///
/// Implementations are immutable after construction; every evaluation is a
/// pure function of its arguments and may be called concurrently.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual std::size_t size() const = 0;
  virtual std::size_t dim() const = 0;

  virtual double component_value(std::size_t k, std::span<const double> x) const = 0;
  virtual void component_gradient(std::size_t k, std::span<const double> x,
                                  std::span<double> out) const = 0;

  virtual double value(std::span<const double> x) const;
  virtual void full_gradient(std::span<const double> x, std::span<double> out) const;

  /// Hessian of f, when the problem class provides one.
  virtual std::optional<Matrix> hessian(std::span<const double> x) const;

  /// Closed-form minimizer, when the problem class provides one.
  virtual std::optional<Vector> reference_minimizer() const;

  /// Closed-form constant L_p with
  /// (1/N) sum_k ||grad f_k(x) - grad f_k(x*)||^{2p} <= L_p ||x - x*||^{2p}.
  virtual std::optional<double> lipschitz_constant(int p) const;

  /// Short human-readable description for run metadata.
  virtual std::string descriptor() const = 0;

  Vector component_gradient(std::size_t k, const Vector& x) const;
  Vector full_gradient(const Vector& x) const;
};

/// f_k(x) = |x - a_k|^2 / 2. Hessian is the identity and mu = L = L_p = 1.
class QuadraticProblem final : public FiniteSumProblem {
 public:
  /// `anchors` holds N rows of dimension d.
  explicit QuadraticProblem(Matrix anchors);

  /// Anchors drawn i.i.d. N(0, scale^2) from a seeded engine.
  static QuadraticProblem random(std::size_t n, std::size_t d, std::uint64_t seed,
                                 double scale = 1.0);

  std::size_t size() const override { return n_; }
  std::size_t dim() const override { return d_; }
  using FiniteSumProblem::component_gradient;
  using FiniteSumProblem::full_gradient;

  double component_value(std::size_t k, std::span<const double> x) const override;
  void component_gradient(std::size_t k, std::span<const double> x,
                          std::span<double> out) const override;

  std::optional<Matrix> hessian(std::span<const double> x) const override;
  std::optional<Vector> reference_minimizer() const override;
  std::optional<double> lipschitz_constant(int p) const override;
  std::string descriptor() const override;

  std::span<const double> anchor(std::size_t k) const {
    return {anchors_.data() + k * d_, d_};
  }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> anchors_;  // row-major N x d
};

struct DatasetMetadata {
  std::string source;       // path or "synthetic"
  std::string format;       // dense-csv, svmlight, synthetic, inline
  std::string label_rule;
  double feature_scale = 1.0;
  std::uint64_t seed = 0;   // synthetic only
};

/// f_k(x) = log(1 + exp(<x, w_k>)) - y_k <x, w_k> with y_k in {0, 1}.
class LogisticProblem final : public FiniteSumProblem {
 public:
  /// `features` holds N rows w_k of dimension d; labels must be 0 or 1.
  LogisticProblem(Matrix features, std::vector<double> labels,
                  DatasetMetadata metadata = {});

  /// Seeded synthetic instance: w_k ~ N(0, feature_scale^2 I), labels drawn
  /// from the logistic model at a random parameter t with <t, w_k> ~ N(0, 1),
  /// so the classes overlap at every scale.
  static LogisticProblem synthetic(std::size_t n, std::size_t d, std::uint64_t seed,
                                   double feature_scale = 1.0);

  std::size_t size() const override { return n_; }
  std::size_t dim() const override { return d_; }
  using FiniteSumProblem::component_gradient;
  using FiniteSumProblem::full_gradient;

  double component_value(std::size_t k, std::span<const double> x) const override;
  void component_gradient(std::size_t k, std::span<const double> x,
                          std::span<double> out) const override;

  /// (1/N) sum_k p_k(x)(1 - p_k(x)) w_k w_k^T.
  std::optional<Matrix> hessian(std::span<const double> x) const override;

  /// (1/(4^p N)) sum_k ||w_k||^{4p}.
  std::optional<double> lipschitz_constant(int p) const override;
  std::string descriptor() const override;

  std::span<const double> feature(std::size_t k) const {
    return {features_.data() + k * d_, d_};
  }
  double label(std::size_t k) const { return labels_[k]; }
  const DatasetMetadata& metadata() const { return metadata_; }

  /// Same data with every feature multiplied by `factor`.
  LogisticProblem scaled(double factor) const;

  /// The first `count` samples.
  LogisticProblem head(std::size_t count) const;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> features_;  // row-major N x d
  std::vector<double> labels_;
  DatasetMetadata metadata_;
};

/// Overflow-safe logistic function exp(z) / (1 + exp(z)).
double logistic(double z);

/// Overflow-safe log(1 + exp(z)).
double softplus(double z);

/// Closed-form L_p; throws std::invalid_argument if the problem has none.
double lipschitz_constant_p(const FiniteSumProblem& problem, int p);

class NewtonError : public std::runtime_error {
 public:
  enum class Kind { NotConverged, SingularHessian, NoHessian };
  NewtonError(Kind kind, double gradient_norm, std::size_t iterations,
              const std::string& what)
      : std::runtime_error(what), kind_(kind), gradient_norm_(gradient_norm),
        iterations_(iterations) {}
  Kind kind() const { return kind_; }
  double gradient_norm() const { return gradient_norm_; }
  std::size_t iterations() const { return iterations_; }

 private:
  Kind kind_;
  double gradient_norm_;
  std::size_t iterations_;
};

struct NewtonResult {
  Vector x;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

/// Reference minimizer. Problems with a closed form return it directly;
/// otherwise damped Newton from the origin with step halving on value
/// increase, stopping once ||grad f|| <= tol and the Newton step is below
/// 1e-6 max(1, ||x||).
NewtonResult solve_minimizer(const FiniteSumProblem& problem, double tol = 1e-10,
                             std::size_t max_iter = 100);

}  // namespace lsaga
