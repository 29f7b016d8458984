#include "msr/ica.hpp"

#include <cmath>

#include "msr/error.hpp"
#include "msr/linalg.hpp"
#include "msr/simd/kernels.hpp"

namespace msr {

std::vector<double> apply_contrast(Matrix& y, Contrast contrast) {
  std::vector<double> mean_deriv(y.rows(), 0.0);
  const double inv_t = 1.0 / static_cast<double>(y.cols());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double acc = 0;
    for (double& v : y.row(r)) {
      if (contrast == Contrast::LogCosh) {
        const double th = std::tanh(v);
        v = th;
        acc += 1.0 - th * th;
      } else {
        const double sq = v * v;
        acc += 3.0 * sq;
        v *= sq;
      }
    }
    mean_deriv[r] = acc * inv_t;
  }
  return mean_deriv;
}

Whitened whiten(const Matrix& x, std::size_t k) {
  if (k == 0 || k > std::min(x.rows(), x.cols())) throw RankError("whiten: k out of range for data shape");
  const SvdResult svd = compact_svd(x);
  const double smax = svd.singular_values.front();
  if (!(svd.singular_values[k - 1] > 1e-10 * smax))
    throw RankError("whiten: data rank is below the requested component count");
  const double sqrt_t = std::sqrt(static_cast<double>(x.cols()));
  Whitened out;
  out.white = row_block(svd.vt, 0, k);
  simd::active().scale(sqrt_t, out.white.data(), out.white.size());
  out.basis = leading_cols(svd.u, k);
  out.dewhiten = out.basis;
  for (std::size_t r = 0; r < out.dewhiten.rows(); ++r)
    for (std::size_t j = 0; j < k; ++j) out.dewhiten(r, j) *= svd.singular_values[j] / sqrt_t;
  return out;
}

Matrix symmetric_decorrelation(const Matrix& b) {
  return matmul(sym_inv_sqrt(matmul_nt(b, b)), b);
}

IcaRun fastica_symmetric(const Matrix& z, const Matrix& init, Contrast contrast, int max_iter,
                         double tol) {
  const std::size_t k = z.rows();
  if (init.rows() != k || init.cols() != k) throw ShapeMismatch("fastica_symmetric: init must be k x k");
  const double inv_t = 1.0 / static_cast<double>(z.cols());
  const auto& kern = simd::active();
  IcaRun run;
  run.unmixing = symmetric_decorrelation(init);
  for (int it = 1; it <= max_iter; ++it) {
    Matrix y = matmul(run.unmixing, z);
    const std::vector<double> deriv = apply_contrast(y, contrast);
    Matrix next = matmul_nt(y, z);  // g(y) z^T
    for (std::size_t r = 0; r < k; ++r) {
      kern.scale(inv_t, next.row(r).data(), k);
      kern.axpy(-deriv[r], run.unmixing.row(r).data(), next.row(r).data(), k);
    }
    next = symmetric_decorrelation(next);
    double worst = 0;
    for (std::size_t r = 0; r < k; ++r) {
      const double c = kern.dot(next.row(r).data(), run.unmixing.row(r).data(), k);
      worst = std::max(worst, 1.0 - std::abs(c));
    }
    run.unmixing = std::move(next);
    run.iterations = it;
    if (worst < tol) {
      run.converged = true;
      break;
    }
  }
  return run;
}

}  // namespace msr
