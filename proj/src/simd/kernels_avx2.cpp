// Built with -mavx2 -mfma. Only reached after the dispatcher has confirmed
// CPU support.

#include "backends.hpp"

#if defined(LSAGA_HAVE_AVX2)

#include <immintrin.h>

namespace lsaga::simd {
namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm_avx2(const double* a, std::size_t n) {
  return dot_avx2(a, a, n);
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d t0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d t1 =
        _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(t0, t0, acc0);
    acc1 = _mm256_fmadd_pd(t1, t1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d t0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(t0, t0, acc0);
  }
  double s = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

// The elementwise kernels below deliberately avoid FMA so they round exactly
// like the scalar reference.

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void subtract_avx2(const double* a, const double* b, double* out,
                   std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i,
                     _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void accumulate_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i),
                                            _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] += x[i];
}

void divide_avx2(double divisor, double* out, std::size_t n) {
  const __m256d vd = _mm256_set1_pd(divisor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(out + i), vd));
  }
  for (; i < n; ++i) out[i] /= divisor;
}

void lambda_saga_update_avx2(double* x, const double* grad, const double* row,
                             const double* mean, double lambda, double gamma,
                             std::size_t n) {
  const __m256d vl = _mm256_set1_pd(lambda);
  const __m256d vg = _mm256_set1_pd(gamma);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d corrected = _mm256_sub_pd(
        _mm256_loadu_pd(grad + i), _mm256_mul_pd(vl, _mm256_loadu_pd(row + i)));
    const __m256d direction =
        _mm256_add_pd(corrected, _mm256_mul_pd(vl, _mm256_loadu_pd(mean + i)));
    _mm256_storeu_pd(x + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                          _mm256_mul_pd(vg, direction)));
  }
  for (; i < n; ++i) {
    const double direction = (grad[i] - lambda * row[i]) + lambda * mean[i];
    x[i] -= gamma * direction;
  }
}

void mean_correction_avx2(double* mean, const double* new_row,
                          const double* old_row, double count, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(count);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d delta = _mm256_sub_pd(_mm256_loadu_pd(new_row + i),
                                        _mm256_loadu_pd(old_row + i));
    _mm256_storeu_pd(mean + i, _mm256_add_pd(_mm256_loadu_pd(mean + i),
                                             _mm256_div_pd(delta, vc)));
  }
  for (; i < n; ++i) mean[i] += (new_row[i] - old_row[i]) / count;
}

constexpr Kernels kAvx2{
    Backend::Avx2,     dot_avx2,        squared_norm_avx2,
    squared_distance_avx2, axpy_avx2,   scale_avx2,
    subtract_avx2,     accumulate_avx2, divide_avx2,
    lambda_saga_update_avx2, mean_correction_avx2,
};

}  // namespace

namespace detail {
const Kernels* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace lsaga::simd

#else

namespace lsaga::simd::detail {
const Kernels* avx2_table() { return nullptr; }
}  // namespace lsaga::simd::detail

#endif
