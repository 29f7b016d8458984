#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "msr/simd/kernels.hpp"

using msr::simd::Kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(gen);
  return v;
}

void check_close(double a, double b, double scale) { CHECK(std::fabs(a - b) <= 1e-12 * (1.0 + scale)); }

void compare_tables(const Kernels& ref, const Kernels& alt) {
  std::mt19937_64 gen(11);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto x = random_vec(n, gen), y = random_vec(n, gen);
    double mag = 0;
    for (std::size_t i = 0; i < n; ++i) mag += std::fabs(x[i] * y[i]) + x[i] * x[i] + y[i] * y[i];
    check_close(ref.dot(x.data(), y.data(), n), alt.dot(x.data(), y.data(), n), mag);
    check_close(ref.sum(x.data(), n), alt.sum(x.data(), n), mag);
    check_close(ref.sum_sq(x.data(), n), alt.sum_sq(x.data(), n), mag);
    check_close(ref.sq_dist(x.data(), y.data(), n), alt.sq_dist(x.data(), y.data(), n), 4 * mag);

    const auto m1 = ref.moments(x.data(), y.data(), n), m2 = alt.moments(x.data(), y.data(), n);
    check_close(m1.sx, m2.sx, mag);
    check_close(m1.sy, m2.sy, mag);
    check_close(m1.sxx, m2.sxx, mag);
    check_close(m1.syy, m2.syy, mag);
    check_close(m1.sxy, m2.sxy, mag);

    const auto c1 = ref.centered_moments(x.data(), y.data(), 0.3, -0.2, n);
    const auto c2 = alt.centered_moments(x.data(), y.data(), 0.3, -0.2, n);
    check_close(c1.sxx, c2.sxx, 2 * mag);
    check_close(c1.syy, c2.syy, 2 * mag);
    check_close(c1.sxy, c2.sxy, 2 * mag);

    auto a1 = y, a2 = y;
    ref.axpy(-1.7, x.data(), a1.data(), n);
    alt.axpy(-1.7, x.data(), a2.data(), n);
    for (std::size_t i = 0; i < n; ++i) check_close(a1[i], a2[i], std::fabs(a1[i]));

    auto s1 = x, s2 = x;
    ref.scale(0.37, s1.data(), n);
    alt.scale(0.37, s2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s1[i] == s2[i]);

    auto rx1 = x, ry1 = y, rx2 = x, ry2 = y;
    const double c = std::cos(0.4), s = std::sin(0.4);
    ref.rotate(rx1.data(), ry1.data(), c, s, n);
    alt.rotate(rx2.data(), ry2.data(), c, s, n);
    for (std::size_t i = 0; i < n; ++i) {
      check_close(rx1[i], rx2[i], std::fabs(rx1[i]));
      check_close(ry1[i], ry2[i], std::fabs(ry1[i]));
    }
  }
}

}  // namespace

TEST_CASE("scalar kernels match hand computations") {
  const Kernels& k = msr::simd::scalar_kernels();
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 0, -1, 1, 3};
  CHECK(k.dot(x.data(), y.data(), 5) == 2 + 0 - 3 + 4 + 15);
  CHECK(k.sum(x.data(), 5) == 15);
  CHECK(k.sum_sq(x.data(), 5) == 55);
  CHECK(k.sq_dist(x.data(), y.data(), 5) == 1 + 4 + 16 + 9 + 4);
  const auto m = k.moments(x.data(), y.data(), 5);
  CHECK(m.sx == 15);
  CHECK(m.sy == 5);
  CHECK(m.sxy == 18);
  const auto c = k.centered_moments(x.data(), y.data(), 3.0, 1.0, 5);
  CHECK(c.sxx == doctest::Approx(10));
  CHECK(c.sxy == doctest::Approx(18 - 15));
  CHECK(k.dot(x.data(), y.data(), 0) == 0);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const Kernels* avx2 = msr::simd::by_name("avx2");
  if (!msr::simd::avx2_available()) {
    CHECK(avx2 == nullptr);
    MESSAGE("AVX2 not available on this machine; equivalence not exercised");
    return;
  }
  REQUIRE(avx2 != nullptr);
  compare_tables(msr::simd::scalar_kernels(), *avx2);
}

TEST_CASE("kernel lookup") {
  CHECK(msr::simd::by_name("scalar") == &msr::simd::scalar_kernels());
  CHECK(msr::simd::by_name("neon") == nullptr);
  const std::string_view active = msr::simd::active().name;
  CHECK((active == "scalar" || active == "avx2"));
}
