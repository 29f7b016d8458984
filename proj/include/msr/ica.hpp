#pragma once

#include "msr/matrix.hpp"
#include "msr/rng.hpp"

namespace msr {

enum class Contrast { LogCosh, Cube };

/// Applies g (first derivative of the contrast G) elementwise to `y` in place
/// and returns the per-row means of g'(y).
std::vector<double> apply_contrast(Matrix& y, Contrast contrast);

/// PCA whitening of the rows of `x` (rows x t, rows centered) down to `k`
/// dimensions: x ~= dewhiten * white, with white (k x t) having unit
/// population variance and uncorrelated rows. Throws RankError if the data
/// has fewer than k non-negligible directions.
struct Whitened {
  Matrix white;     // k x t
  Matrix dewhiten;  // rows x k
  Matrix basis;     // rows x k, leading left singular vectors
};
Whitened whiten(const Matrix& x, std::size_t k);

/// (b b^T)^{-1/2} b
Matrix symmetric_decorrelation(const Matrix& b);

struct IcaRun {
  Matrix unmixing;  // k x k, orthogonal
  int iterations = 0;
  bool converged = false;
};

/// Symmetric FastICA on whitened data `z` (k x t). Starts from `init`
/// (orthogonal k x k) and stops when every unmixing row turns by less than
/// `tol` (1 - |<b_new, b_old>| < tol).
IcaRun fastica_symmetric(const Matrix& z, const Matrix& init, Contrast contrast, int max_iter,
                         double tol);

}  // namespace msr
