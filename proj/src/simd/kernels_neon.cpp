#include "backends.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace lsaga::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm_neon(const double* a, std::size_t n) {
  return dot_neon(a, a, n);
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t t = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, t, t);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(double alpha, const double* x, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void subtract_neon(const double* a, const double* b, double* out,
                   std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void accumulate_neon(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), vld1q_f64(x + i)));
  }
  for (; i < n; ++i) out[i] += x[i];
}

void divide_neon(double divisor, double* out, std::size_t n) {
  const float64x2_t vd = vdupq_n_f64(divisor);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vdivq_f64(vld1q_f64(out + i), vd));
  for (; i < n; ++i) out[i] /= divisor;
}

void lambda_saga_update_neon(double* x, const double* grad, const double* row,
                             const double* mean, double lambda, double gamma,
                             std::size_t n) {
  const float64x2_t vl = vdupq_n_f64(lambda);
  const float64x2_t vg = vdupq_n_f64(gamma);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t corrected =
        vsubq_f64(vld1q_f64(grad + i), vmulq_f64(vl, vld1q_f64(row + i)));
    const float64x2_t direction =
        vaddq_f64(corrected, vmulq_f64(vl, vld1q_f64(mean + i)));
    vst1q_f64(x + i, vsubq_f64(vld1q_f64(x + i), vmulq_f64(vg, direction)));
  }
  for (; i < n; ++i) {
    const double direction = (grad[i] - lambda * row[i]) + lambda * mean[i];
    x[i] -= gamma * direction;
  }
}

void mean_correction_neon(double* mean, const double* new_row,
                          const double* old_row, double count, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(count);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t delta = vsubq_f64(vld1q_f64(new_row + i), vld1q_f64(old_row + i));
    vst1q_f64(mean + i, vaddq_f64(vld1q_f64(mean + i), vdivq_f64(delta, vc)));
  }
  for (; i < n; ++i) mean[i] += (new_row[i] - old_row[i]) / count;
}

constexpr Kernels kNeon{
    Backend::Neon,     dot_neon,        squared_norm_neon,
    squared_distance_neon, axpy_neon,   scale_neon,
    subtract_neon,     accumulate_neon, divide_neon,
    lambda_saga_update_neon, mean_correction_neon,
};

}  // namespace

namespace detail {
const Kernels* neon_table() { return &kNeon; }
}  // namespace detail

}  // namespace lsaga::simd

#else

namespace lsaga::simd::detail {
const Kernels* neon_table() { return nullptr; }
}  // namespace lsaga::simd::detail

#endif
