// AVX2 + FMA variants.  This translation unit is compiled with -mavx2 -mfma
// and must only be entered after a runtime CPU check.

#include "hbi/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace hbi::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_avx2(a + i * cols, x, cols);
}

double residual_sq_norm_avx2(const double* b, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = b[i] - y[i];
    s += d * d;
  }
  return s;
}

// No FMA here so results match the scalar reference bit for bit.
void axpby_avx2(double alpha, const double* x, double beta, const double* y,
                double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) out[i] = alpha * x[i] + beta * y[i];
}

void power_product_avx2(const double* v, const double* tau, int power,
                        double* out, std::size_t n) {
  std::size_t i = 0;
  switch (power) {
    case 1:
      for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(v + i),
                                                abs_pd(_mm256_loadu_pd(tau + i))));
      for (; i < n; ++i) out[i] = v[i] * std::fabs(tau[i]);
      return;
    case -1:
      for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(v + i),
                                                abs_pd(_mm256_loadu_pd(tau + i))));
      for (; i < n; ++i) out[i] = v[i] / std::fabs(tau[i]);
      return;
    case 2:
      for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_loadu_pd(tau + i);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(v + i), _mm256_mul_pd(t, t)));
      }
      for (; i < n; ++i) out[i] = v[i] * (tau[i] * tau[i]);
      return;
    case -2:
      for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_loadu_pd(tau + i);
        _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(v + i), _mm256_mul_pd(t, t)));
      }
      for (; i < n; ++i) out[i] = v[i] / (tau[i] * tau[i]);
      return;
    default:
      scalar_table().power_product(v, tau, power, out, n);
  }
}

constexpr KernelTable kAvx2{Isa::avx2,          dot_avx2,   gemv_avx2,
                            residual_sq_norm_avx2, axpby_avx2,
                            power_product_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace hbi::kernels
