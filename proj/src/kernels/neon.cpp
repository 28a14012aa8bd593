// NEON (aarch64 Advanced SIMD) variants.  Built only on ARM64 targets, where
// Advanced SIMD is part of the base ISA.

#include "hbi/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace hbi::kernels {
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

void gemv_neon(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_neon(a + i * cols, x, cols);
}

double residual_sq_norm_neon(const double* b, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(b + i), vld1q_f64(y + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = b[i] - y[i];
    s += d * d;
  }
  return s;
}

void axpby_neon(double alpha, const double* x, double beta, const double* y,
                double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const float64x2_t vb = vdupq_n_f64(beta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vmulq_f64(va, vld1q_f64(x + i)),
                                 vmulq_f64(vb, vld1q_f64(y + i))));
  for (; i < n; ++i) out[i] = alpha * x[i] + beta * y[i];
}

void power_product_neon(const double* v, const double* tau, int power,
                        double* out, std::size_t n) {
  std::size_t i = 0;
  switch (power) {
    case 1:
      for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(v + i), vabsq_f64(vld1q_f64(tau + i))));
      for (; i < n; ++i) out[i] = v[i] * std::fabs(tau[i]);
      return;
    case -1:
      for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vdivq_f64(vld1q_f64(v + i), vabsq_f64(vld1q_f64(tau + i))));
      for (; i < n; ++i) out[i] = v[i] / std::fabs(tau[i]);
      return;
    case 2:
      for (; i + 2 <= n; i += 2) {
        const float64x2_t t = vld1q_f64(tau + i);
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(v + i), vmulq_f64(t, t)));
      }
      for (; i < n; ++i) out[i] = v[i] * (tau[i] * tau[i]);
      return;
    case -2:
      for (; i + 2 <= n; i += 2) {
        const float64x2_t t = vld1q_f64(tau + i);
        vst1q_f64(out + i, vdivq_f64(vld1q_f64(v + i), vmulq_f64(t, t)));
      }
      for (; i < n; ++i) out[i] = v[i] / (tau[i] * tau[i]);
      return;
    default:
      scalar_table().power_product(v, tau, power, out, n);
  }
}

constexpr KernelTable kNeon{Isa::neon,          dot_neon,   gemv_neon,
                            residual_sq_norm_neon, axpby_neon,
                            power_product_neon};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &kNeon; }
}  // namespace detail

}  // namespace hbi::kernels
