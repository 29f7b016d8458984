#include "msr/rng.hpp"

#include <cmath>

#include "msr/error.hpp"
#include "msr/linalg.hpp"

namespace msr {

namespace {

// splitmix64 finalizer
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t c : coords) h = splitmix(h ^ splitmix(c + 0x632be59bd9b4e019ULL));
  return h;
}

Rng Rng::stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  return Rng(mix_seed(seed, coords));
}

double Rng::laplace() {
  // Inverse CDF on u in (-1/2, 1/2).
  double u;
  do {
    u = uniform() - 0.5;
  } while (u == -0.5);
  const double b = 1.0 / std::sqrt(2.0);
  return -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
}

Matrix random_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows < cols) throw RankError("random_orthonormal: more columns than rows");
  return thin_qr(random_normal(rows, cols, rng)).q;
}

}  // namespace msr
