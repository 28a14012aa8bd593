#pragma once
// Data-parallel inner loops of the sampler and energy evaluations.
//
// Every kernel has a scalar reference implementation and, where the target
// allows it, an AVX2 (x86-64) or NEON (aarch64) variant.  The variant is
// chosen once at runtime from the CPU feature set; HBI_SIMD=scalar|avx2|neon
// in the environment or select() overrides the choice.
//
// Elementwise kernels (axpby, power_product) are bit-identical across
// variants.  Reductions (dot, gemv, residual_sq_norm) use a different
// summation order in the vector variants and agree to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace hbi::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y = A x for a row-major rows x cols matrix.
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y);
  // sum (b_i - y_i)^2
  double (*residual_sq_norm)(const double* b, const double* y, std::size_t n);
  // out = alpha x + beta y
  void (*axpby)(double alpha, const double* x, double beta, const double* y,
                double* out, std::size_t n);
  // out = v * |tau|^power for power in {1, -1, 2, -2}
  void (*power_product)(const double* v, const double* tau, int power,
                        double* out, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the variant is not compiled in or not supported by this CPU.
const KernelTable* table_for(Isa isa);

const KernelTable& active();

// Returns false (and leaves the selection unchanged) if isa is unavailable.
bool select(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);
double residual_sq_norm(std::span<const double> b, std::span<const double> y);
void axpby(double alpha, std::span<const double> x, double beta,
           std::span<const double> y, std::span<double> out);

// out = v * |tau|^exponent.  Integer exponents +-1, +-2 take the vector path;
// anything else falls back to std::pow.
void power_product(std::span<const double> v, std::span<const double> tau,
                   double exponent, std::span<double> out);

namespace detail {
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace hbi::kernels
