#include "lsaga/problems.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lsaga/rng.hpp"
#include "lsaga/simd.hpp"

namespace lsaga {

double FiniteSumProblem::value(std::span<const double> x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < size(); ++k) sum += component_value(k, x);
  return sum / static_cast<double>(size());
}

void FiniteSumProblem::full_gradient(std::span<const double> x,
                                     std::span<double> out) const {
  std::vector<double> buffer(dim());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < size(); ++k) {
    component_gradient(k, x, buffer);
    simd::accumulate(buffer, out);
  }
  simd::divide(static_cast<double>(size()), out);
}

std::optional<Matrix> FiniteSumProblem::hessian(std::span<const double>) const {
  return std::nullopt;
}

std::optional<Vector> FiniteSumProblem::reference_minimizer() const {
  return std::nullopt;
}

std::optional<double> FiniteSumProblem::lipschitz_constant(int) const {
  return std::nullopt;
}

Vector FiniteSumProblem::component_gradient(std::size_t k, const Vector& x) const {
  Vector out(x.size());
  component_gradient(k, view(x), view(out));
  return out;
}

Vector FiniteSumProblem::full_gradient(const Vector& x) const {
  Vector out(x.size());
  full_gradient(view(x), view(out));
  return out;
}

// Quadratic

QuadraticProblem::QuadraticProblem(Matrix anchors)
    : n_(static_cast<std::size_t>(anchors.rows())),
      d_(static_cast<std::size_t>(anchors.cols())) {
  if (n_ == 0 || d_ == 0) {
    throw std::invalid_argument("quadratic problem needs at least one anchor and d >= 1");
  }
  anchors_.resize(n_ * d_);
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t j = 0; j < d_; ++j) anchors_[k * d_ + j] = anchors(k, j);
}

QuadraticProblem QuadraticProblem::random(std::size_t n, std::size_t d,
                                          std::uint64_t seed, double scale) {
  auto engine = make_engine(seed, 1);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix anchors(n, d);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < d; ++j) anchors(k, j) = normal(engine);
  return QuadraticProblem(std::move(anchors));
}

double QuadraticProblem::component_value(std::size_t k,
                                         std::span<const double> x) const {
  return 0.5 * simd::squared_distance(x, anchor(k));
}

void QuadraticProblem::component_gradient(std::size_t k, std::span<const double> x,
                                          std::span<double> out) const {
  simd::subtract(x, anchor(k), out);
}

std::optional<Matrix> QuadraticProblem::hessian(std::span<const double>) const {
  return Matrix::Identity(d_, d_);
}

std::optional<Vector> QuadraticProblem::reference_minimizer() const {
  Vector mean = Vector::Zero(d_);
  for (std::size_t k = 0; k < n_; ++k) simd::accumulate(anchor(k), view(mean));
  simd::divide(static_cast<double>(n_), view(mean));
  return mean;
}

std::optional<double> QuadraticProblem::lipschitz_constant(int p) const {
  if (p < 1) throw std::invalid_argument("p must be at least 1");
  return 1.0;
}

std::string QuadraticProblem::descriptor() const {
  std::ostringstream os;
  os << "quadratic(N=" << n_ << ",d=" << d_ << ")";
  return os.str();
}

// Logistic

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

LogisticProblem::LogisticProblem(Matrix features, std::vector<double> labels,
                                 DatasetMetadata metadata)
    : n_(static_cast<std::size_t>(features.rows())),
      d_(static_cast<std::size_t>(features.cols())),
      labels_(std::move(labels)),
      metadata_(std::move(metadata)) {
  if (n_ == 0 || d_ == 0) throw std::invalid_argument("logistic problem needs N >= 1 and d >= 1");
  if (labels_.size() != n_) throw std::invalid_argument("one label per feature row required");
  for (std::size_t k = 0; k < n_; ++k) {
    if (labels_[k] != 0.0 && labels_[k] != 1.0) {
      throw std::invalid_argument("labels must be 0 or 1 (row " + std::to_string(k + 1) + ")");
    }
  }
  features_.resize(n_ * d_);
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t j = 0; j < d_; ++j) features_[k * d_ + j] = features(k, j);
}

LogisticProblem LogisticProblem::synthetic(std::size_t n, std::size_t d,
                                           std::uint64_t seed, double feature_scale) {
  auto engine = make_engine(seed, 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector truth(d);
  for (std::size_t j = 0; j < d; ++j) truth(j) = normal(engine) / (feature_scale * std::sqrt(static_cast<double>(d)));
  Matrix features(n, d);
  std::vector<double> labels(n);
  for (std::size_t k = 0; k < n; ++k) {
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      features(k, j) = feature_scale * normal(engine);
      z += features(k, j) * truth(j);
    }
    labels[k] = uniform(engine) < logistic(z) ? 1.0 : 0.0;
  }
  DatasetMetadata meta;
  meta.source = "synthetic";
  meta.format = "synthetic";
  meta.label_rule = "logistic-model";
  meta.feature_scale = feature_scale;
  meta.seed = seed;
  return LogisticProblem(std::move(features), std::move(labels), std::move(meta));
}

double LogisticProblem::component_value(std::size_t k,
                                        std::span<const double> x) const {
  const double z = simd::dot(x, feature(k));
  return softplus(z) - labels_[k] * z;
}

void LogisticProblem::component_gradient(std::size_t k, std::span<const double> x,
                                         std::span<double> out) const {
  const double z = simd::dot(x, feature(k));
  simd::scale(logistic(z) - labels_[k], feature(k), out);
}

std::optional<Matrix> LogisticProblem::hessian(std::span<const double> x) const {
  Matrix h = Matrix::Zero(d_, d_);
  for (std::size_t k = 0; k < n_; ++k) {
    const auto w = feature(k);
    const double p = logistic(simd::dot(x, w));
    const double weight = p * (1.0 - p);
    Eigen::Map<const Vector> wk(w.data(), static_cast<Eigen::Index>(d_));
    h.selfadjointView<Eigen::Lower>().rankUpdate(wk, weight);
  }
  h = h.selfadjointView<Eigen::Lower>();
  return h / static_cast<double>(n_);
}

std::optional<double> LogisticProblem::lipschitz_constant(int p) const {
  if (p < 1) throw std::invalid_argument("p must be at least 1");
  double sum = 0.0;
  for (std::size_t k = 0; k < n_; ++k) {
    sum += std::pow(simd::squared_norm(feature(k)), 2.0 * p);
  }
  return sum / (std::pow(4.0, p) * static_cast<double>(n_));
}

std::string LogisticProblem::descriptor() const {
  std::ostringstream os;
  os << "logistic(N=" << n_ << ",d=" << d_ << ",source=" << metadata_.source
     << ",scale=" << metadata_.feature_scale << ")";
  return os.str();
}

LogisticProblem LogisticProblem::scaled(double factor) const {
  Matrix features(n_, d_);
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t j = 0; j < d_; ++j) features(k, j) = factor * features_[k * d_ + j];
  DatasetMetadata meta = metadata_;
  meta.feature_scale *= factor;
  return LogisticProblem(std::move(features), labels_, std::move(meta));
}

LogisticProblem LogisticProblem::head(std::size_t count) const {
  if (count == 0 || count > n_) throw std::invalid_argument("head: count must be in [1, N]");
  Matrix features(count, d_);
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t j = 0; j < d_; ++j) features(k, j) = features_[k * d_ + j];
  return LogisticProblem(std::move(features),
                         std::vector<double>(labels_.begin(), labels_.begin() + count),
                         metadata_);
}

double lipschitz_constant_p(const FiniteSumProblem& problem, int p) {
  if (auto value = problem.lipschitz_constant(p)) return *value;
  throw std::invalid_argument("no closed form L_p for " + problem.descriptor());
}

// Newton

namespace {
constexpr double kStepTol = 1e-6;
}  // namespace

NewtonResult solve_minimizer(const FiniteSumProblem& problem, double tol,
                             std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (auto closed = problem.reference_minimizer()) {
    const double norm = problem.full_gradient(*closed).norm();
    return {*closed, norm, 0};
  }

  const std::size_t d = problem.dim();
  Vector x = Vector::Zero(d);
  Vector grad = problem.full_gradient(x);
  double fx = problem.value(view(x));
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double gnorm = grad.norm();
    auto h = problem.hessian(view(x));
    if (!h) {
      throw NewtonError(NewtonError::Kind::NoHessian, gnorm, it,
                        "Newton solver needs a Hessian; " + problem.descriptor() +
                            " provides none");
    }
    Eigen::LDLT<Matrix> ldlt(*h);
    const Vector diag = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || diag.maxCoeff() == 0.0 ||
        diag.minCoeff() <= 1e-13 * diag.maxCoeff()) {
      std::ostringstream os;
      os << "singular Hessian at Newton iteration " << it << " (gradient norm " << gnorm
         << "); the minimizer may be at infinity, consider adding a ridge term";
      throw NewtonError(NewtonError::Kind::SingularHessian, gnorm, it, os.str());
    }
    const Vector step = ldlt.solve(grad);
    if (gnorm <= tol && step.norm() <= kStepTol * std::max(1.0, x.norm())) return {x, gnorm, it};

    double t = 1.0;
    Vector candidate = x - step;
    double fc = problem.value(view(candidate));
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(fx);
    for (int halvings = 0; !(fc <= fx + slack) && halvings < 60; ++halvings) {
      t *= 0.5;
      candidate = x - t * step;
      fc = problem.value(view(candidate));
    }
    x = std::move(candidate);
    fx = fc;
    grad = problem.full_gradient(x);
  }

  const double gnorm = grad.norm();
  std::ostringstream os;
  os << "Newton did not converge in " << max_iter << " iterations; last gradient norm "
     << gnorm << " (iterate norm " << x.norm() << "; the minimizer may be at infinity)";
  throw NewtonError(NewtonError::Kind::NotConverged, gnorm, max_iter, os.str());
}

}  // namespace lsaga
