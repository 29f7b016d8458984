#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "msr/matrix.hpp"

namespace msr {

/// Seeded generator. Independent streams are derived by hashing a seed
/// together with stream coordinates (center, k, fold, ...), so results do
/// not depend on the order in which streams are consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Laplace(0, 1/sqrt(2)): zero mean, unit variance.
  double laplace();
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

Matrix random_normal(std::size_t rows, std::size_t cols, Rng& rng);

/// QR of a standard-normal matrix; rows >= cols.
Matrix random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace msr
