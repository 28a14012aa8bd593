#include "hbi/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string>

namespace hbi::kernels {

#ifndef HBI_HAVE_AVX2
const KernelTable* detail::avx2_table() { return nullptr; }
#endif
#ifndef HBI_HAVE_NEON
const KernelTable* detail::neon_table() { return nullptr; }
#endif

namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(HBI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#ifdef HBI_HAVE_NEON
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* pick_initial() {
  if (const char* env = std::getenv("HBI_SIMD")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == isa_name(isa)) {
        if (const KernelTable* t = table_for(isa)) return t;
      }
    }
  }
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (const KernelTable* t = table_for(isa)) return t;
  }
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_initial()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(Isa isa) {
  if (!cpu_supports(isa)) return nullptr;
  switch (isa) {
    case Isa::scalar: return &scalar_table();
    case Isa::avx2: return detail::avx2_table();
    case Isa::neon: return detail::neon_table();
  }
  return nullptr;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == cols && y.size() == rows);
  active().gemv(a.data(), rows, cols, x.data(), y.data());
}

double residual_sq_norm(std::span<const double> b, std::span<const double> y) {
  assert(b.size() == y.size());
  return active().residual_sq_norm(b.data(), y.data(), b.size());
}

void axpby(double alpha, std::span<const double> x, double beta,
           std::span<const double> y, std::span<double> out) {
  assert(x.size() == y.size() && x.size() == out.size());
  active().axpby(alpha, x.data(), beta, y.data(), out.data(), x.size());
}

void power_product(std::span<const double> v, std::span<const double> tau,
                   double exponent, std::span<double> out) {
  assert(v.size() == tau.size() && v.size() == out.size());
  if (exponent == 1.0 || exponent == -1.0 || exponent == 2.0 || exponent == -2.0) {
    active().power_product(v.data(), tau.data(), static_cast<int>(exponent),
                           out.data(), v.size());
    return;
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = v[i] * std::pow(std::fabs(tau[i]), exponent);
}

}  // namespace hbi::kernels
