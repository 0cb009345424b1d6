#include "lsaga/simd.hpp"

namespace lsaga::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double squared_distance_scalar(const double* a, const double* b,
                               std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void subtract_scalar(const double* a, const double* b, double* out,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void accumulate_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += x[i];
}

void divide_scalar(double divisor, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] /= divisor;
}

void lambda_saga_update_scalar(double* x, const double* grad, const double* row,
                               const double* mean, double lambda, double gamma,
                               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double direction = (grad[i] - lambda * row[i]) + lambda * mean[i];
    x[i] -= gamma * direction;
  }
}

void mean_correction_scalar(double* mean, const double* new_row,
                            const double* old_row, double count,
                            std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) mean[i] += (new_row[i] - old_row[i]) / count;
}

constexpr Kernels kScalar{
    Backend::Scalar,     dot_scalar,        squared_norm_scalar,
    squared_distance_scalar, axpy_scalar,   scale_scalar,
    subtract_scalar,     accumulate_scalar, divide_scalar,
    lambda_saga_update_scalar, mean_correction_scalar,
};

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

}  // namespace lsaga::simd
