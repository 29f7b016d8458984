#include "msr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "msr/error.hpp"
#include "msr/simd/kernels.hpp"

namespace msr {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxJacobiSweeps = 80;

void require_finite(const Matrix& a, const char* op) {
  if (!a.all_finite()) throw InvalidInput(std::string(op) + ": non-finite entry");
}

// Householder reflections applied in-place to `cols` (row j = column j of the
// input, so every reflection touches contiguous memory). Returns the
// reflector vectors, each stored from position j onwards.
std::vector<std::vector<double>> householder_columns(Matrix& cols) {
  const auto& k = simd::active();
  const std::size_t n = cols.rows();
  const std::size_t m = cols.cols();
  std::vector<std::vector<double>> reflectors(n);
  for (std::size_t j = 0; j < n; ++j) {
    double* x = cols.row(j).data() + j;
    const std::size_t len = m - j;
    const double norm = std::sqrt(k.sum_sq(x, len));
    std::vector<double> v(x, x + len);
    if (norm == 0.0) {
      continue;  // nothing to annihilate; empty reflector
    }
    const double alpha = x[0] > 0 ? -norm : norm;
    v[0] -= alpha;
    const double vnorm_sq = k.sum_sq(v.data(), len);
    if (vnorm_sq == 0.0) continue;
    for (std::size_t l = j; l < n; ++l) {
      double* y = cols.row(l).data() + j;
      const double f = -2.0 * k.dot(v.data(), y, len) / vnorm_sq;
      k.axpy(f, v.data(), y, len);
    }
    reflectors[j] = std::move(v);
  }
  return reflectors;
}

// One-sided Jacobi on the rows of `cols` (columns of the original matrix).
// On return the rows are mutually orthogonal and `vcols` (row j = column j
// of V) holds the accumulated rotations.
void one_sided_jacobi(Matrix& cols, Matrix& vcols) {
  const auto& k = simd::active();
  const std::size_t n = cols.rows();
  const std::size_t len = cols.cols();
  const double tol = kEps * static_cast<double>(std::max<std::size_t>(len, 1));
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* cp = cols.row(p).data();
        double* cq = cols.row(q).data();
        const simd::Moments mm = k.moments(cp, cq, len);
        const double alpha = mm.sxx;
        const double beta = mm.syy;
        const double gamma = mm.sxy;
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        k.rotate(cp, cq, c, s, len);
        k.rotate(vcols.row(p).data(), vcols.row(q).data(), c, s, n);
      }
    }
    if (!rotated) break;
  }
}

// Extends the orthonormal rows already present in `basis` (flagged in
// `filled`) to a full orthonormal set using Gram-Schmidt on unit vectors.
void complete_orthonormal_rows(Matrix& basis, std::vector<bool>& filled) {
  const auto& k = simd::active();
  const std::size_t dim = basis.cols();
  std::size_t candidate = 0;
  for (std::size_t j = 0; j < basis.rows(); ++j) {
    if (filled[j]) continue;
    while (candidate < dim) {
      std::vector<double> e(dim, 0.0);
      e[candidate++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < basis.rows(); ++i) {
          if (!filled[i]) continue;
          const double* b = basis.row(i).data();
          k.axpy(-k.dot(b, e.data(), dim), b, e.data(), dim);
        }
      }
      const double norm = std::sqrt(k.sum_sq(e.data(), dim));
      if (norm > 0.5) {
        k.scale(1.0 / norm, e.data(), dim);
        std::copy(e.begin(), e.end(), basis.row(j).data());
        filled[j] = true;
        break;
      }
    }
  }
}

// SVD for rows >= cols.
SvdResult svd_tall(const Matrix& a) {
  const std::size_t n = a.cols();
  QrResult qr = thin_qr(a);

  Matrix cols = transpose(qr.r);  // row j = column j of R
  Matrix vcols = Matrix::identity(n);
  one_sided_jacobi(cols, vcols);

  const auto& k = simd::active();
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(k.sum_sq(cols.row(j).data(), n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double smax = n ? sigma[order[0]] : 0.0;
  const double floor = smax * kEps * static_cast<double>(n) * 4.0;
  Matrix ur_rows(n, n);  // row j = j-th left singular vector of R
  std::vector<bool> filled(n, false);
  SvdResult out;
  out.singular_values.resize(n);
  out.vt = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    const double s = sigma[src];
    std::copy_n(vcols.row(src).data(), n, out.vt.row(j).data());
    if (s > floor && s > 0.0) {
      out.singular_values[j] = s;
      std::copy_n(cols.row(src).data(), n, ur_rows.row(j).data());
      k.scale(1.0 / s, ur_rows.row(j).data(), n);
      filled[j] = true;
    } else {
      out.singular_values[j] = s;
    }
  }
  complete_orthonormal_rows(ur_rows, filled);
  out.u = matmul_nt(qr.q, ur_rows);
  return out;
}

}  // namespace

QrResult thin_qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw ShapeMismatch("thin_qr: needs rows >= cols");
  const auto& k = simd::active();

  Matrix cols = transpose(a);
  const auto reflectors = householder_columns(cols);

  QrResult out;
  out.r = Matrix(n, n);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t i = 0; i <= l; ++i) out.r(i, l) = cols(l, i);

  // Q columns: apply the reflectors to e_0..e_{n-1} in reverse order.
  Matrix qcols(n, m);
  for (std::size_t j = 0; j < n; ++j) qcols(j, j) = 1.0;
  for (std::size_t jj = n; jj-- > 0;) {
    const auto& v = reflectors[jj];
    if (v.empty()) continue;
    const std::size_t len = m - jj;
    const double vnorm_sq = k.sum_sq(v.data(), len);
    for (std::size_t l = 0; l < n; ++l) {
      double* y = qcols.row(l).data() + jj;
      const double f = -2.0 * k.dot(v.data(), y, len) / vnorm_sq;
      if (f != 0.0) k.axpy(f, v.data(), y, len);
    }
  }
  // Non-negative diagonal of R.
  for (std::size_t i = 0; i < n; ++i) {
    if (out.r(i, i) < 0) {
      for (std::size_t l = 0; l < n; ++l) out.r(i, l) = -out.r(i, l);
      k.scale(-1.0, qcols.row(i).data(), m);
    }
  }
  out.q = transpose(qcols);
  return out;
}

SvdResult compact_svd(const Matrix& a) {
  require_finite(a, "compact_svd");
  if (a.rows() == 0 || a.cols() == 0) throw InvalidInput("compact_svd: empty matrix");
  if (a.rows() >= a.cols()) return svd_tall(a);
  SvdResult t = svd_tall(transpose(a));
  SvdResult out;
  out.u = transpose(t.vt);
  out.singular_values = std::move(t.singular_values);
  out.vt = transpose(t.u);
  return out;
}

Matrix pseudo_inverse(const Matrix& a) {
  const SvdResult svd = compact_svd(a);
  const double smax = svd.singular_values.empty() ? 0.0 : svd.singular_values.front();
  const double cutoff = 1e-12 * smax;
  // pinv = V diag(1/s) U^T, built as (diag(1/s) vt)^T u^T.
  Matrix scaled_vt = svd.vt;
  for (std::size_t j = 0; j < scaled_vt.rows(); ++j) {
    const double s = svd.singular_values[j];
    const double inv = (s > cutoff && s > 0.0) ? 1.0 / s : 0.0;
    simd::active().scale(inv, scaled_vt.row(j).data(), scaled_vt.cols());
  }
  return matmul_tn(scaled_vt, transpose(svd.u));
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("symmetric_eigen: matrix not square");
  require_finite(a, "symmetric_eigen");
  const std::size_t n = a.rows();
  Matrix m = a;
  Matrix vrows = Matrix::identity(n);  // row j = column j of V
  const auto& k = simd::active();
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0, diag = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) (i == j ? diag : off) += m(i, j) * m(i, j);
    if (off <= kEps * kEps * diag || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(1.0, theta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = t * c;
        // m <- J^T m J with J the (p,q) rotation.
        for (std::size_t r = 0; r < n; ++r) {
          const double mrp = m(r, p), mrq = m(r, q);
          m(r, p) = c * mrp - s * mrq;
          m(r, q) = s * mrp + c * mrq;
        }
        k.rotate(m.row(p).data(), m.row(q).data(), c, s, n);
        k.rotate(vrows.row(p).data(), vrows.row(q).data(), c, s, n);
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return m(x, x) > m(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = m(order[j], order[j]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = vrows(order[j], r);
  }
  return out;
}

Matrix sym_inv_sqrt(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("sym_inv_sqrt: matrix not square");
  require_finite(a, "sym_inv_sqrt");
  const double scale = std::max(max_abs(a), 1e-300);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * scale)
        throw InvalidInput("sym_inv_sqrt: matrix not symmetric");
  const SymmetricEigen eig = symmetric_eigen(a);
  const double largest = eig.values.front();
  const double smallest = eig.values.back();
  if (!(largest > 0.0) || smallest <= 1e-12 * largest)
    throw SingularMatrix("sym_inv_sqrt: matrix not positive definite");
  const std::size_t n = a.rows();
  Matrix scaled(n, n);  // V diag(lambda^{-1/2})
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < n; ++j)
      scaled(r, j) = eig.vectors(r, j) / std::sqrt(eig.values[j]);
  Matrix b = matmul_nt(scaled, eig.vectors);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) b(i, j) = b(j, i) = 0.5 * (b(i, j) + b(j, i));
  return b;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson: length mismatch");
  if (x.size() < 2) throw InvalidInput("pearson: needs at least two samples");
  const auto& k = simd::active();
  const double n = static_cast<double>(x.size());
  const double mx = k.sum(x.data(), x.size()) / n;
  const double my = k.sum(y.data(), y.size()) / n;
  const simd::Moments m = k.centered_moments(x.data(), y.data(), mx, my, x.size());
  if (m.sxx <= 0.0 || m.syy <= 0.0) throw DegenerateVector("pearson: zero-variance input");
  const double r = m.sxy / std::sqrt(m.sxx * m.syy);
  return std::clamp(r, -1.0, 1.0);
}

ZScored zscore_rows_flagged(const Matrix& a) {
  const auto& k = simd::active();
  ZScored out{a, {}};
  const std::size_t t = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double* row = out.values.row(r).data();
    const double mean = k.sum(row, t) / static_cast<double>(t);
    const simd::Moments m = k.centered_moments(row, row, mean, mean, t);
    const double sd = std::sqrt(m.sxx / static_cast<double>(t));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      std::fill_n(row, t, 0.0);
      out.constant_rows.push_back(r);
      continue;
    }
    for (std::size_t c = 0; c < t; ++c) row[c] = (row[c] - mean) / sd;
  }
  return out;
}

Matrix zscore_rows(const Matrix& a) { return zscore_rows_flagged(a).values; }

Matrix procrustes(const Matrix& m) {
  const SvdResult svd = compact_svd(m);
  return matmul(svd.u, svd.vt);
}

double orthonormality_error(const Matrix& w) {
  Matrix g = matmul_tn(w, w);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return max_abs(g);
}

}  // namespace msr
