#include "msr/simd/kernels.hpp"

namespace msr::simd {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum(const double* x, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq(const double* x, std::size_t n) { return dot(x, x, n); }

double sq_dist(const double* x, const double* y, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

Moments moments(const double* x, const double* y, std::size_t n) {
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    m.sx += x[i];
    m.sy += y[i];
    m.sxx += x[i] * x[i];
    m.syy += y[i] * y[i];
    m.sxy += x[i] * y[i];
  }
  return m;
}

Moments centered_moments(const double* x, const double* y, double mx, double my,
                         std::size_t n) {
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i] - mx;
    const double b = y[i] - my;
    m.sxx += a * a;
    m.syy += b * b;
    m.sxy += a * b;
  }
  return m;
}

void rotate(double* x, double* y, double c, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", dot, axpy, scale, sum, sum_sq, sq_dist, moments, centered_moments, rotate};
  return k;
}

}  // namespace msr::simd
