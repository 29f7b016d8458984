#include "msr/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "msr/error.hpp"
#include "msr/linalg.hpp"
#include "msr/rng.hpp"
#include "msr/simd/kernels.hpp"

namespace msr {

namespace {

void check_inputs(std::span<const Matrix> xs, const char* op) {
  if (xs.empty()) throw InvalidInput(std::string(op) + ": no subjects");
  for (const Matrix& x : xs) {
    if (x.rows() != xs.front().rows() || x.cols() != xs.front().cols())
      throw ShapeMismatch(std::string(op) + ": subjects differ in shape");
    if (!x.all_finite()) throw InvalidInput(std::string(op) + ": non-finite data");
  }
  if (xs.front().empty()) throw InvalidInput(std::string(op) + ": empty data");
}

void check_k(std::size_t k, std::size_t limit, const char* op) {
  if (k == 0 || k > limit)
    throw RankError(std::string(op) + ": k=" + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");
}

std::vector<Matrix> split_rows(const Matrix& stacked, std::size_t blocks) {
  const std::size_t v = stacked.rows() / blocks;
  std::vector<Matrix> out;
  out.reserve(blocks);
  for (std::size_t i = 0; i < blocks; ++i) out.push_back(row_block(stacked, i * v, (i + 1) * v));
  return out;
}

// (1/m) sum_i w_i^T x_i
Matrix mean_projection(std::span<const Matrix> xs, const std::vector<Matrix>& w) {
  Matrix s(w.front().cols(), xs.front().cols());
  for (std::size_t i = 0; i < xs.size(); ++i) s += matmul_tn(w[i], xs[i]);
  return (1.0 / static_cast<double>(xs.size())) * s;
}

// Sign so each shared row has non-negative skewness, then order rows by the
// energy of their rank-one contribution sum_i ||w_i[:,j]||^2 ||p_i[j,:]||^2,
// where p_i is the subject's shared-space projection.
void canonicalize(FactorFit& fit, std::span<const Matrix> xs) {
  const std::size_t k = fit.s.rows();
  const std::size_t t = fit.s.cols();
  for (std::size_t j = 0; j < k; ++j) {
    auto row = fit.s.row(j);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(t);
    double third = 0;
    for (double v : row) third += (v - mean) * (v - mean) * (v - mean);
    if (third < 0) {
      for (double& v : row) v = -v;
      for (Matrix& w : fit.w)
        for (std::size_t r = 0; r < w.rows(); ++r) w(r, j) = -w(r, j);
    }
  }
  std::vector<double> energy(k, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Matrix p = project(fit, xs[i], i);
    for (std::size_t j = 0; j < k; ++j) {
      double col = 0;
      for (std::size_t r = 0; r < fit.w[i].rows(); ++r) col += fit.w[i](r, j) * fit.w[i](r, j);
      energy[j] += col * simd::active().sum_sq(p.row(j).data(), p.cols());
    }
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energy[a] > energy[b]; });

  Matrix s(k, t);
  for (std::size_t j = 0; j < k; ++j) std::copy_n(fit.s.row(order[j]).data(), t, s.row(j).data());
  fit.s = std::move(s);
  for (Matrix& w : fit.w) {
    Matrix sorted(w.rows(), k);
    for (std::size_t r = 0; r < w.rows(); ++r)
      for (std::size_t j = 0; j < k; ++j) sorted(r, j) = w(r, order[j]);
    w = std::move(sorted);
  }
}

struct IcaStage {
  Matrix mixing;  // rows x k
  Matrix sources; // k x t
  int iterations = 0;
  bool converged = false;
};

// Whitens the rows of y to k dimensions and runs symmetric FastICA:
// y ~= mixing * sources.
IcaStage ica_stage(const Matrix& y, std::size_t k, const FitConfig& cfg, std::uint64_t stream_tag) {
  const Whitened wh = whiten(y, k);
  Rng rng = Rng::stream(cfg.seed, {stream_tag});
  const IcaRun run = fastica_symmetric(wh.white, random_orthonormal(k, k, rng), cfg.contrast, cfg.max_iter, cfg.tol);
  IcaStage out;
  out.sources = matmul(run.unmixing, wh.white);
  out.mixing = matmul_nt(wh.dewhiten, run.unmixing);  // dewhiten * B^T
  out.iterations = run.iterations;
  out.converged = run.converged;
  return out;
}

}  // namespace

std::string_view model_name(ModelId id) {
  switch (id) {
    case ModelId::PCA: return "pca";
    case ModelId::SRM: return "srm";
    case ModelId::ICA: return "ica";
    case ModelId::SRICA: return "sr-ica";
    case ModelId::SRGICA: return "sr-gica";
  }
  return "unknown";
}

ModelId parse_model(std::string_view name) {
  std::string s;
  for (char c : name)
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "pca") return ModelId::PCA;
  if (s == "srm") return ModelId::SRM;
  if (s == "ica") return ModelId::ICA;
  if (s == "srica") return ModelId::SRICA;
  if (s == "srgica") return ModelId::SRGICA;
  throw InvalidInput("unknown model: " + std::string(name));
}

bool has_orthonormal_maps(ModelId id) { return id == ModelId::SRM || id == ModelId::SRICA; }

double srm_objective(std::span<const Matrix> xs, const std::vector<Matrix>& w, const Matrix& s) {
  double total = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) total += distance_sq(xs[i], matmul(w[i], s));
  return total / static_cast<double>(xs.size());
}

FactorFit fit_pca(std::span<const Matrix> xs, const FitConfig& cfg) {
  check_inputs(xs, "fit_pca");
  const Matrix stacked = vstack(xs);
  check_k(cfg.k, std::min(stacked.rows(), stacked.cols()), "fit_pca");
  const SvdResult svd = compact_svd(stacked);
  FactorFit fit;
  fit.model = ModelId::PCA;
  const Matrix w = leading_cols(svd.u, cfg.k);
  fit.s = matmul_tn(w, stacked);
  fit.w = split_rows(w, xs.size());
  return fit;
}

FactorFit fit_srm(std::span<const Matrix> xs, const FitConfig& cfg) {
  check_inputs(xs, "fit_srm");
  const std::size_t m = xs.size();
  const std::size_t v = xs.front().rows();
  const std::size_t t = xs.front().cols();
  check_k(cfg.k, std::min(v, t), "fit_srm");
  if (!(cfg.tol > 0)) throw InvalidInput("fit_srm: tol must be positive");

  FactorFit fit;
  fit.model = ModelId::SRM;
  if (!cfg.init_w.empty()) {
    if (cfg.init_w.size() != m) throw ShapeMismatch("fit_srm: init_w needs one map per subject");
    for (const Matrix& w0 : cfg.init_w)
      if (w0.rows() != v || w0.cols() != cfg.k) throw ShapeMismatch("fit_srm: init_w has the wrong shape");
    fit.w = cfg.init_w;
  } else {
    fit.w.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      Rng rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(ModelId::SRM), i});
      fit.w.push_back(random_orthonormal(v, cfg.k, rng));
    }
  }

  const auto& kern = simd::active();
  double data_energy = 0;
  for (const Matrix& x : xs) data_energy += frobenius_sq(x);
  data_energy /= static_cast<double>(m);

  // With orthonormal w_i and s the mean projection,
  // (1/m) sum ||x_i - w_i s||^2 = (1/m) sum ||x_i||^2 - ||s||^2.
  Matrix s = mean_projection(xs, fit.w);
  fit.converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    for (std::size_t i = 0; i < m; ++i) fit.w[i] = procrustes(matmul_nt(xs[i], s));
    s = mean_projection(xs, fit.w);
    const double objective = std::max(0.0, data_energy - kern.sum_sq(s.data(), s.size()));
    const double previous = fit.objective_trace.empty() ? INFINITY : fit.objective_trace.back();
    fit.objective_trace.push_back(objective);
    fit.iterations = it;
    if ((std::isfinite(previous) && previous - objective <= cfg.tol * previous) || objective <= 1e-300) {
      fit.converged = true;
      break;
    }
  }
  fit.s = std::move(s);
  return fit;
}

FactorFit fit_ica(std::span<const Matrix> xs, const FitConfig& cfg) {
  check_inputs(xs, "fit_ica");
  const Matrix stacked = vstack(xs);
  check_k(cfg.k, std::min(stacked.rows(), stacked.cols()), "fit_ica");
  IcaStage stage = ica_stage(stacked, cfg.k, cfg, static_cast<std::uint64_t>(ModelId::ICA));
  FactorFit fit;
  fit.model = ModelId::ICA;
  fit.s = std::move(stage.sources);
  fit.w = split_rows(stage.mixing, xs.size());
  fit.iterations = stage.iterations;
  fit.converged = stage.converged;
  canonicalize(fit, xs);
  return fit;
}

FactorFit fit_srica(std::span<const Matrix> xs, const FitConfig& cfg) {
  check_inputs(xs, "fit_srica");
  const std::size_t m = xs.size();
  const std::size_t k = cfg.k;
  check_k(k, std::min(xs.front().rows(), xs.front().cols()), "fit_srica");

  // Work in each subject's own whitened k-dimensional coordinates; the
  // unmixing u_i is k x k orthogonal and the voxel map is basis_i u_i^T.
  std::vector<Whitened> white;
  std::vector<Matrix> unmix;
  white.reserve(m);
  unmix.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    white.push_back(whiten(xs[i], k));
    Rng rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(ModelId::SRICA), i});
    unmix.push_back(random_orthonormal(k, k, rng));
  }
  const auto& kern = simd::active();
  const double inv_t = 1.0 / static_cast<double>(xs.front().cols());
  const double inv_m = 1.0 / static_cast<double>(m);

  auto shared = [&] {
    Matrix s(k, xs.front().cols());
    for (std::size_t i = 0; i < m; ++i) s += matmul(unmix[i], white[i].white);
    return inv_m * s;
  };

  FactorFit fit;
  fit.model = ModelId::SRICA;
  fit.converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const Matrix s = shared();
    Matrix gs = s;
    const std::vector<double> deriv = apply_contrast(gs, cfg.contrast);
    bool converged = true;
    for (std::size_t i = 0; i < m; ++i) {
      // E{g(S) z_i^T} - diag(E{g'(S)}) E{S z_i^T}
      Matrix next = matmul_nt(gs, white[i].white);
      const Matrix cross = matmul_nt(s, white[i].white);
      for (std::size_t r = 0; r < k; ++r) {
        kern.scale(inv_t, next.row(r).data(), k);
        kern.axpy(-deriv[r] * inv_t, cross.row(r).data(), next.row(r).data(), k);
      }
      next = symmetric_decorrelation(next);
      // w_new^T w_old = u_new u_old^T
      Matrix turn = matmul_nt(next, unmix[i]);
      for (std::size_t r = 0; r < k; ++r) turn(r, r) -= 1.0;
      if (max_abs(turn) >= cfg.tol) converged = false;
      unmix[i] = std::move(next);
    }
    fit.iterations = it;
    if (converged) {
      fit.converged = true;
      break;
    }
  }
  fit.s = shared();
  fit.w.reserve(m);
  for (std::size_t i = 0; i < m; ++i) fit.w.push_back(matmul_nt(white[i].basis, unmix[i]));
  canonicalize(fit, xs);
  return fit;
}

FactorFit fit_srgica(std::span<const Matrix> xs, const FitConfig& cfg, std::size_t k1, std::size_t k2) {
  check_inputs(xs, "fit_srgica");
  const std::size_t m = xs.size();
  const std::size_t v = xs.front().rows();
  const std::size_t t = xs.front().cols();
  check_k(k1, std::min(v, t), "fit_srgica (k1)");
  check_k(k2, std::min(m * k1, t), "fit_srgica (k2)");

  // Stage 1: per-subject spatial PCA x_i = f_i p_i.
  std::vector<Matrix> f(m), p(m);
  for (std::size_t i = 0; i < m; ++i) {
    const SvdResult svd = compact_svd(xs[i]);
    f[i] = leading_cols(svd.u, k1);
    p[i] = matmul_tn(f[i], xs[i]);
  }
  // Stage 2: PCA of the stacked reduced data p = g y.
  const Matrix stacked = vstack(p);
  const SvdResult svd = compact_svd(stacked);
  const Matrix g = leading_cols(svd.u, k2);
  const Matrix y = matmul_tn(g, stacked);
  // Stage 3: ICA y = a s.
  IcaStage stage = ica_stage(y, k2, cfg, static_cast<std::uint64_t>(ModelId::SRGICA));

  FactorFit fit;
  fit.model = ModelId::SRGICA;
  fit.s = std::move(stage.sources);
  fit.iterations = stage.iterations;
  fit.converged = stage.converged;
  fit.w.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Matrix gi = row_block(g, i * k1, (i + 1) * k1);
    fit.w.push_back(matmul(f[i], matmul(gi, stage.mixing)));
  }
  canonicalize(fit, xs);
  return fit;
}

FactorFit fit_model(ModelId model, std::span<const Matrix> xs, const FitConfig& cfg) {
  switch (model) {
    case ModelId::PCA: return fit_pca(xs, cfg);
    case ModelId::SRM: return fit_srm(xs, cfg);
    case ModelId::ICA: return fit_ica(xs, cfg);
    case ModelId::SRICA: return fit_srica(xs, cfg);
    case ModelId::SRGICA: {
      check_inputs(xs, "fit_srgica");
      const std::size_t k1 = cfg.k1 ? cfg.k1 : std::min(xs.front().rows(), xs.front().cols());
      return fit_srgica(xs, cfg, k1, cfg.k);
    }
  }
  throw InvalidInput("fit_model: unknown model");
}

Matrix projector(const FactorFit& fit, std::size_t subject) {
  if (subject >= fit.w.size()) throw IndexError("project: subject out of range");
  if (has_orthonormal_maps(fit.model)) return transpose(fit.w[subject]);
  return pseudo_inverse(fit.w[subject]);
}

Matrix project(const FactorFit& fit, const Matrix& x_new, std::size_t subject) {
  if (subject >= fit.w.size()) throw IndexError("project: subject out of range");
  if (x_new.rows() != fit.w[subject].rows()) throw ShapeMismatch("project: row count differs from map");
  if (has_orthonormal_maps(fit.model)) return matmul_tn(fit.w[subject], x_new);
  return matmul(pseudo_inverse(fit.w[subject]), x_new);
}

}  // namespace msr
