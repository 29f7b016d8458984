#pragma once

#include <span>
#include <vector>

#include "msr/matrix.hpp"

namespace msr {

/// Compact SVD a = u * diag(singular_values) * vt with r = min(rows, cols).
/// `u` always has orthonormal columns, including directions belonging to
/// zero singular values.
struct SvdResult {
  Matrix u;                            // m x r
  std::vector<double> singular_values; // non-increasing, length r
  Matrix vt;                           // r x n
};

/// Throws InvalidInput on non-finite entries.
SvdResult compact_svd(const Matrix& a);

/// Moore-Penrose pseudo-inverse. Singular values at or below 1e-12 * s_max
/// count as zero.
Matrix pseudo_inverse(const Matrix& a);

/// a^{-1/2} for symmetric positive definite `a`. Throws SingularMatrix when
/// the smallest eigenvalue is <= 1e-12 times the largest, InvalidInput when
/// `a` is not symmetric to 1e-10.
Matrix sym_inv_sqrt(const Matrix& a);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns are eigenvectors
};

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Thin Householder QR of a tall matrix (rows >= cols): a = q r with q
/// orthonormal (rows x cols) and r upper triangular with non-negative diagonal.
struct QrResult {
  Matrix q;
  Matrix r;
};
QrResult thin_qr(const Matrix& a);

/// Sample Pearson correlation. Throws InvalidInput on length mismatch or
/// fewer than two samples, DegenerateVector on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Per-row standardization: mean 0 and unit population standard deviation.
/// Constant rows become all-zero rows and are listed in `constant_rows`.
struct ZScored {
  Matrix values;
  std::vector<std::size_t> constant_rows;
};
ZScored zscore_rows_flagged(const Matrix& a);
Matrix zscore_rows(const Matrix& a);

/// Orthogonal Procrustes: the matrix with orthonormal columns closest to `m`
/// in Frobenius norm (u vt of its compact SVD).
Matrix procrustes(const Matrix& m);

/// max |w^T w - I|
double orthonormality_error(const Matrix& w);

}  // namespace msr
