#include <doctest.h>

#include <cmath>
#include <limits>

#include "msr/error.hpp"
#include "msr/linalg.hpp"
#include "msr/rng.hpp"
#include "oracles.hpp"

using namespace msr;

namespace {

Matrix low_rank(std::size_t rows, std::size_t cols, std::size_t rank, Rng& rng) {
  return matmul(random_normal(rows, rank, rng), random_normal(rank, cols, rng));
}

Matrix reconstruct(const SvdResult& s) {
  Matrix us = s.u;
  for (std::size_t r = 0; r < us.rows(); ++r)
    for (std::size_t c = 0; c < us.cols(); ++c) us(r, c) *= s.singular_values[c];
  return matmul(us, s.vt);
}

}  // namespace

TEST_CASE("matrix products agree with each other") {
  Rng rng(1);
  const Matrix a = random_normal(7, 5, rng), b = random_normal(7, 4, rng), c = random_normal(6, 5, rng);
  CHECK(max_abs_diff(matmul_tn(a, b), matmul(transpose(a), b)) < 1e-12);
  CHECK(max_abs_diff(matmul_nt(a, c), matmul(a, transpose(c))) < 1e-12);
  const Eigen::MatrixXd ea = oracle::to_eigen(a), eb = oracle::to_eigen(b);
  CHECK(max_abs_diff(oracle::from_eigen(ea.transpose() * eb * eb.transpose()), matmul_nt(matmul_tn(a, b), b)) < 1e-10);
  const Matrix lit{{1, 2}, {3, 4}};
  CHECK(lit(1, 0) == 3);
  CHECK(frobenius_sq(lit) == 30);
}

TEST_CASE("svd of a small known matrix") {
  const Matrix a{{3, 0}, {4, 5}};
  const SvdResult s = compact_svd(a);
  REQUIRE(s.singular_values.size() == 2);
  CHECK(s.singular_values[0] == doctest::Approx(3 * std::sqrt(5.0)).epsilon(1e-12));
  CHECK(s.singular_values[1] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(max_abs_diff(reconstruct(s), a) < 1e-12);
}

TEST_CASE("svd matches the Eigen oracle on tall, wide and rank-deficient inputs") {
  Rng rng(2);
  const std::size_t shapes[][3] = {{9, 4, 4}, {4, 9, 4}, {12, 7, 3}, {6, 11, 2}, {30, 30, 30}, {50, 8, 8}, {5, 5, 1}};
  for (const auto& sh : shapes) {
    const Matrix a = low_rank(sh[0], sh[1], sh[2], rng);
    const SvdResult s = compact_svd(a);
    const auto ref = oracle::singular_values(a);
    REQUIRE(s.singular_values.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::fabs(s.singular_values[i] - ref[i]) < 1e-10 * (1 + ref[0]));
    for (std::size_t i = 1; i < ref.size(); ++i) CHECK(s.singular_values[i] <= s.singular_values[i - 1]);
    CHECK(max_abs_diff(reconstruct(s), a) < 1e-10 * (1 + ref[0]));
    CHECK(orthonormality_error(s.u) < 1e-10);
    CHECK(orthonormality_error(transpose(s.vt)) < 1e-10);
  }
}

TEST_CASE("svd rejects non-finite input") {
  Matrix a(3, 3, 1.0);
  a(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(compact_svd(a), InvalidInput);
}

TEST_CASE("pseudo-inverse of a rank-one matrix") {
  const Matrix a{{1, 2}, {2, 4}};
  const Matrix expected = (1.0 / 25.0) * transpose(a);
  CHECK(max_abs_diff(pseudo_inverse(a), expected) < 1e-14);
}

TEST_CASE("pseudo-inverse satisfies the Penrose conditions") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 3 + trial % 7, cols = 2 + (trial * 3) % 8, rank = 1 + trial % std::min(rows, cols);
    const Matrix a = low_rank(rows, cols, rank, rng);
    const Matrix p = pseudo_inverse(a);
    const Matrix ap = matmul(a, p), pa = matmul(p, a);
    const double tol = 1e-9 * (1 + max_abs(a)) * (1 + max_abs(p));
    CHECK(max_abs_diff(matmul(ap, a), a) < tol);
    CHECK(max_abs_diff(matmul(pa, p), p) < tol);
    CHECK(max_abs_diff(ap, transpose(ap)) < tol);
    CHECK(max_abs_diff(pa, transpose(pa)) < tol);
    const Matrix ref = oracle::from_eigen(oracle::to_eigen(a).completeOrthogonalDecomposition().pseudoInverse());
    CHECK(max_abs_diff(p, ref) < tol);
  }
}

TEST_CASE("inverse square root") {
  const Matrix d{{4, 0}, {0, 9}};
  CHECK(max_abs_diff(sym_inv_sqrt(d), Matrix{{0.5, 0}, {0, 1.0 / 3.0}}) < 1e-14);

  Rng rng(4);
  const Matrix b = random_normal(6, 6, rng);
  const Matrix spd = matmul_nt(b, b) + Matrix::identity(6);
  const Matrix x = sym_inv_sqrt(spd);
  CHECK(max_abs_diff(matmul(matmul(x, x), spd), Matrix::identity(6)) < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::to_eigen(spd));
  CHECK(max_abs_diff(x, oracle::from_eigen(es.operatorInverseSqrt())) < 1e-10);

  CHECK_THROWS_AS(sym_inv_sqrt(Matrix{{1, 1}, {1, 1}}), SingularMatrix);
  CHECK_THROWS_AS(sym_inv_sqrt(Matrix{{2, 1}, {0, 2}}), InvalidInput);
}

TEST_CASE("symmetric eigen-decomposition matches Eigen") {
  Rng rng(5);
  const Matrix b = random_normal(8, 8, rng);
  const Matrix a = b + transpose(b);
  const SymmetricEigen e = symmetric_eigen(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::to_eigen(a));
  for (int i = 0; i < 8; ++i) CHECK(e.values[i] == doctest::Approx(es.eigenvalues()(7 - i)).epsilon(1e-10));
  CHECK(orthonormality_error(e.vectors) < 1e-10);
  const Matrix back = matmul(matmul(e.vectors, Matrix::diagonal(e.values)), transpose(e.vectors));
  CHECK(max_abs_diff(back, a) < 1e-10);
}

TEST_CASE("thin qr") {
  Rng rng(6);
  const Matrix a = random_normal(10, 4, rng);
  const QrResult qr = thin_qr(a);
  CHECK(orthonormality_error(qr.q) < 1e-12);
  CHECK(max_abs_diff(matmul(qr.q, qr.r), a) < 1e-12);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(qr.r(r, r) >= 0);
    for (std::size_t c = 0; c < r; ++c) CHECK(qr.r(r, c) == 0);
  }
}

TEST_CASE("pearson correlation") {
  const std::vector<double> x{1, 2, 3, 4}, up{2, 4, 6, 8}, down{4, 3, 2, 1}, flat{5, 5, 5, 5};
  CHECK(pearson(x, up) == doctest::Approx(1.0));
  CHECK(pearson(x, down) == doctest::Approx(-1.0));
  const std::vector<double> a{1, 0, 2, -1}, b{0.5, 1, 2, 0};
  CHECK(pearson(a, b) == doctest::Approx(oracle::pearson(a, b)).epsilon(1e-14));
  CHECK_THROWS_AS(pearson(x, flat), DegenerateVector);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), InvalidInput);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{2}), InvalidInput);
}

TEST_CASE("z-scoring rows") {
  const Matrix a{{1, 2, 3, 4}, {7, 7, 7, 7}, {-2, 0, 0, 6}};
  const ZScored z = zscore_rows_flagged(a);
  REQUIRE(z.constant_rows == std::vector<std::size_t>{1});
  for (std::size_t r : {0u, 2u}) {
    double mean = 0, ss = 0;
    for (double v : z.values.row(r)) mean += v;
    for (double v : z.values.row(r)) ss += v * v;
    CHECK(std::fabs(mean) < 1e-12);
    CHECK(ss / 4 == doctest::Approx(1.0));
  }
  for (double v : z.values.row(1)) CHECK(v == 0);
}

TEST_CASE("procrustes") {
  Rng rng(7);
  const Matrix q = random_orthonormal(9, 3, rng);
  const std::vector<double> d{3, 2, 0.5};
  CHECK(max_abs_diff(procrustes(matmul(q, Matrix::diagonal(d))), q) < 1e-10);
  const Matrix r = procrustes(random_normal(9, 3, rng));
  CHECK(orthonormality_error(r) < 1e-12);
}
