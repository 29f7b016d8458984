#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msr/ica.hpp"
#include "msr/matrix.hpp"

namespace msr {

enum class ModelId : std::uint8_t { PCA = 0, SRM = 1, ICA = 2, SRICA = 3, SRGICA = 4 };

std::string_view model_name(ModelId id);
/// Accepts "pca", "srm", "ica", "srica"/"sr-ica", "srgica"/"sr-gica" (any case).
ModelId parse_model(std::string_view name);
/// SRM and SR-ICA constrain every W_i to orthonormal columns.
bool has_orthonormal_maps(ModelId id);

struct FitConfig {
  std::size_t k = 10;
  int max_iter = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  Contrast contrast = Contrast::LogCosh;
  /// SR-GICA first-stage width; 0 means min(v, t).
  std::size_t k1 = 0;
  /// Optional SRM starting maps (one v x k orthonormal matrix per subject).
  std::vector<Matrix> init_w;
};

struct FactorFit {
  ModelId model = ModelId::SRM;
  std::vector<Matrix> w;  // m blocks, v x k
  Matrix s;               // k x t
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = true;

  std::size_t subject_count() const { return w.size(); }
  std::size_t voxel_count() const { return w.empty() ? 0 : w.front().rows(); }
  std::size_t k() const { return s.rows(); }
};

/// (1/m) sum_i ||x_i - w_i s||_F^2
double srm_objective(std::span<const Matrix> xs, const std::vector<Matrix>& w, const Matrix& s);

FactorFit fit_pca(std::span<const Matrix> xs, const FitConfig& cfg);
FactorFit fit_srm(std::span<const Matrix> xs, const FitConfig& cfg);
FactorFit fit_ica(std::span<const Matrix> xs, const FitConfig& cfg);
FactorFit fit_srica(std::span<const Matrix> xs, const FitConfig& cfg);
FactorFit fit_srgica(std::span<const Matrix> xs, const FitConfig& cfg, std::size_t k1, std::size_t k2);

/// Dispatch on `model`; SR-GICA uses k1 = cfg.k1 (or min(v, t)) and k2 = cfg.k.
FactorFit fit_model(ModelId model, std::span<const Matrix> xs, const FitConfig& cfg);

/// Shared-space response of new data for one subject: w_i^T x for
/// orthonormal-map models, pinv(w_i) x otherwise.
Matrix project(const FactorFit& fit, const Matrix& x_new, std::size_t subject);

/// The matrix `project` applies for `subject` (k x v).
Matrix projector(const FactorFit& fit, std::size_t subject);

}  // namespace msr
