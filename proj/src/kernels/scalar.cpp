#include "hbi/kernels.hpp"

#include <cmath>

namespace hbi::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_scalar(a + i * cols, x, cols);
}

double residual_sq_norm_scalar(const double* b, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = b[i] - y[i];
    s += d * d;
  }
  return s;
}

void axpby_scalar(double alpha, const double* x, double beta, const double* y,
                  double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i] + beta * y[i];
}

void power_product_scalar(const double* v, const double* tau, int power,
                          double* out, std::size_t n) {
  switch (power) {
    case 1:
      for (std::size_t i = 0; i < n; ++i) out[i] = v[i] * std::fabs(tau[i]);
      break;
    case -1:
      for (std::size_t i = 0; i < n; ++i) out[i] = v[i] / std::fabs(tau[i]);
      break;
    case 2:
      for (std::size_t i = 0; i < n; ++i) out[i] = v[i] * (tau[i] * tau[i]);
      break;
    case -2:
      for (std::size_t i = 0; i < n; ++i) out[i] = v[i] / (tau[i] * tau[i]);
      break;
    default:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = v[i] * std::pow(std::fabs(tau[i]), static_cast<double>(power));
  }
}

constexpr KernelTable kScalar{Isa::scalar,        dot_scalar,   gemv_scalar,
                              residual_sq_norm_scalar, axpby_scalar,
                              power_product_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace hbi::kernels
