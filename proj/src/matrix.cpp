#include "msr/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "msr/error.hpp"
#include "msr/simd/kernels.hpp"

namespace msr {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch(std::string(op) + ": shape mismatch");
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw ShapeMismatch("Matrix: data size does not match shape");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeMismatch("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeMismatch("matmul: inner dimensions differ");
  const auto& k = simd::active();
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail != 0.0) k.axpy(ail, b.row(l).data(), ci, b.cols());
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeMismatch("matmul_tn: row counts differ");
  const auto& k = simd::active();
  Matrix c(a.cols(), b.cols());
  for (std::size_t l = 0; l < a.rows(); ++l) {
    const double* bl = b.row(l).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ali = a(l, i);
      if (ali != 0.0) k.axpy(ali, bl, c.row(i).data(), b.cols());
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeMismatch("matmul_nt: column counts differ");
  const auto& k = simd::active();
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      c(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix c = a;
  c += b;
  return c;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+=");
  simd::active().axpy(1.0, b.data(), a.data(), a.size());
  return a;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix c = a;
  simd::active().axpy(-1.0, b.data(), c.data(), c.size());
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  simd::active().scale(s, c.data(), c.size());
  return c;
}

double frobenius_sq(const Matrix& a) { return simd::active().sum_sq(a.data(), a.size()); }

double frobenius(const Matrix& a) { return std::sqrt(frobenius_sq(a)); }

double distance_sq(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "distance_sq");
  return simd::active().sq_dist(a.data(), b.data(), a.size());
}

double max_abs(const Matrix& a) {
  double m = 0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

Matrix gather_rows(const Matrix& a, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), a.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= a.rows()) throw IndexError("gather_rows: row index out of range");
    std::copy_n(a.row(idx[r]).data(), a.cols(), out.row(r).data());
  }
  return out;
}

Matrix row_block(const Matrix& a, std::size_t r0, std::size_t r1) {
  if (r0 > r1 || r1 > a.rows()) throw IndexError("row_block: range out of bounds");
  Matrix out(r1 - r0, a.cols());
  std::copy_n(a.data() + r0 * a.cols(), out.size(), out.data());
  return out;
}

Matrix col_block(const Matrix& a, std::size_t c0, std::size_t c1) {
  if (c0 > c1 || c1 > a.cols()) throw IndexError("col_block: range out of bounds");
  Matrix out(a.rows(), c1 - c0);
  for (std::size_t r = 0; r < a.rows(); ++r)
    std::copy_n(a.row(r).data() + c0, c1 - c0, out.row(r).data());
  return out;
}

Matrix leading_cols(const Matrix& a, std::size_t k) { return col_block(a, 0, k); }

Matrix vstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != blocks.front().cols()) throw ShapeMismatch("vstack: column counts differ");
    rows += b.rows();
  }
  Matrix out(rows, blocks.front().cols());
  double* dst = out.data();
  for (const auto& b : blocks) dst = std::copy_n(b.data(), b.size(), dst);
  return out;
}

Matrix hstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != blocks.front().rows()) throw ShapeMismatch("hstack: row counts differ");
    cols += b.cols();
  }
  Matrix out(blocks.front().rows(), cols);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double* dst = out.row(r).data();
    for (const auto& b : blocks) dst = std::copy_n(b.row(r).data(), b.cols(), dst);
  }
  return out;
}

}  // namespace msr
