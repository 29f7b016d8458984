#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace msr {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// Row-wise literal, e.g. Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);     // a b
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a b^T

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix& operator+=(Matrix& a, const Matrix& b);

double frobenius_sq(const Matrix& a);
double frobenius(const Matrix& a);
/// ||a - b||_F^2
double distance_sq(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Rows listed in `idx`, in that order.
Matrix gather_rows(const Matrix& a, std::span<const std::size_t> idx);
/// Rows [r0, r1).
Matrix row_block(const Matrix& a, std::size_t r0, std::size_t r1);
/// Columns [c0, c1).
Matrix col_block(const Matrix& a, std::size_t c0, std::size_t c1);
/// Leading `k` columns.
Matrix leading_cols(const Matrix& a, std::size_t k);
Matrix vstack(std::span<const Matrix> blocks);
Matrix hstack(std::span<const Matrix> blocks);

}  // namespace msr
