#pragma once

// Data-parallel inner loops used by the optimizer and the problem classes.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2 on
// x86-64, NEON on aarch64) are selected once at runtime from the host CPU.
// Elementwise kernels are bit-identical across backends: they evaluate the
// same operations in the same order with no fused multiply-add. Reductions
// (dot, squared_norm, squared_distance) use lane-parallel accumulators and
// agree with the scalar reference only up to summation round-off.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace lsaga::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view backend_name(Backend backend);

struct Kernels {
  Backend backend;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_norm)(const double* a, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = alpha * x[i]
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  // out[i] = a[i] - b[i]
  void (*subtract)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] += x[i]
  void (*accumulate)(const double* x, double* out, std::size_t n);
  // out[i] /= divisor
  void (*divide)(double divisor, double* out, std::size_t n);

  // x[i] -= gamma * ((grad[i] - lambda * row[i]) + lambda * mean[i])
  void (*lambda_saga_update)(double* x, const double* grad, const double* row,
                             const double* mean, double lambda, double gamma,
                             std::size_t n);
  // mean[i] += (new_row[i] - old_row[i]) / count
  void (*mean_correction)(double* mean, const double* new_row,
                          const double* old_row, double count, std::size_t n);
};

const Kernels& scalar_kernels();

// Kernels for `backend` if it was compiled in and the host supports it.
const Kernels* find_kernels(Backend backend);

// All backends usable on this host, scalar first.
std::vector<Backend> available_backends();

// Active backend. Defaults to the widest supported one; the environment
// variable LSAGA_SIMD=scalar|avx2|neon overrides the initial choice.
const Kernels& active();

// Switch the active backend. Returns false (and changes nothing) if the
// backend is unavailable on this host.
bool select_backend(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_norm(std::span<const double> a) {
  return active().squared_norm(a.data(), a.size());
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scale(double alpha, std::span<const double> x,
                  std::span<double> out) {
  active().scale(alpha, x.data(), out.data(), x.size());
}

inline void subtract(std::span<const double> a, std::span<const double> b,
                     std::span<double> out) {
  active().subtract(a.data(), b.data(), out.data(), a.size());
}

inline void accumulate(std::span<const double> x, std::span<double> out) {
  active().accumulate(x.data(), out.data(), x.size());
}

inline void divide(double divisor, std::span<double> out) {
  active().divide(divisor, out.data(), out.size());
}

inline void lambda_saga_update(std::span<double> x, std::span<const double> grad,
                               std::span<const double> row,
                               std::span<const double> mean, double lambda,
                               double gamma) {
  active().lambda_saga_update(x.data(), grad.data(), row.data(), mean.data(),
                              lambda, gamma, x.size());
}

inline void mean_correction(std::span<double> mean,
                            std::span<const double> new_row,
                            std::span<const double> old_row, double count) {
  active().mean_correction(mean.data(), new_row.data(), old_row.data(), count,
                           mean.size());
}

}  // namespace lsaga::simd
