#pragma once

// Data-parallel inner loops shared by the dense linear algebra and the
// evaluation code. Each kernel has a scalar reference implementation and, on
// x86-64, an AVX2/FMA variant. The active table is chosen once per process
// from the CPU feature bits (override with MSR_SIMD=scalar|avx2), so every
// thread sees the same arithmetic and results stay reproducible.

#include <cstddef>
#include <string_view>

namespace msr::simd {

/// Raw sums needed for a Pearson correlation in one pass.
struct Moments {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
};

struct Kernels {
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  // ||x - y||^2
  double (*sq_dist)(const double* x, const double* y, std::size_t n);
  Moments (*moments)(const double* x, const double* y, std::size_t n);
  // sxx, syy, sxy of (x - mx) and (y - my); sx and sy are left at zero.
  Moments (*centered_moments)(const double* x, const double* y, double mx, double my,
                              std::size_t n);
  // (x, y) <- (c x - s y, s x + c y)
  void (*rotate)(double* x, double* y, double c, double s, std::size_t n);
};

const Kernels& scalar_kernels();

/// The kernel table selected for this process.
const Kernels& active();

/// True when the CPU and the build both support the AVX2 table.
bool avx2_available();

/// Look a table up by name ("scalar" or "avx2"); nullptr when unavailable.
const Kernels* by_name(std::string_view name);

}  // namespace msr::simd
