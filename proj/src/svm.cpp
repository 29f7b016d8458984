#include "msr/svm.hpp"

#include <algorithm>
#include <cmath>

#include "msr/error.hpp"
#include "msr/simd/kernels.hpp"

namespace msr {

namespace {

// Dual coordinate descent for min 0.5 ||w||^2 + C sum max(0, 1 - y_i w.x_i).
std::vector<double> train_binary(const Matrix& x, const std::vector<double>& y, const SvmConfig& cfg) {
  const auto& k = simd::active();
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  std::vector<double> w(d, 0.0), alpha(n, 0.0), qdiag(n);
  for (std::size_t i = 0; i < n; ++i) qdiag[i] = k.sum_sq(x.row(i).data(), d);
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double pg_max = -INFINITY, pg_min = INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = x.row(i).data();
      const double g = y[i] * k.dot(w.data(), xi, d) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] == cfg.c) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0 || qdiag[i] == 0.0) continue;
      const double next = std::clamp(alpha[i] - g / qdiag[i], 0.0, cfg.c);
      const double delta = (next - alpha[i]) * y[i];
      alpha[i] = next;
      if (delta != 0.0) k.axpy(delta, xi, w.data(), d);
    }
    if (pg_max - pg_min < cfg.tol) break;
  }
  return w;
}

}  // namespace

void LinearSvm::fit(const Matrix& features, const std::vector<std::uint32_t>& labels, const SvmConfig& cfg) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n == 0 || d == 0) throw InvalidInput("LinearSvm::fit: empty training set");
  if (labels.size() != n) throw ShapeMismatch("LinearSvm::fit: one label per row required");

  classes_ = labels;
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());

  mean_.assign(d, 0.0);
  scale_.assign(d, 1.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean_[c] += features(r, c);
  for (double& m : mean_) m /= static_cast<double>(n);
  for (std::size_t c = 0; c < d; ++c) {
    double ss = 0;
    for (std::size_t r = 0; r < n; ++r) ss += (features(r, c) - mean_[c]) * (features(r, c) - mean_[c]);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    scale_[c] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  Matrix x(n, d + 1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) x(r, c) = (features(r, c) - mean_[c]) * scale_[c];
    x(r, d) = 1.0;
  }

  weights_ = Matrix(classes_.size(), d + 1);
  std::vector<double> y(n);
  for (std::size_t ci = 0; ci < classes_.size(); ++ci) {
    for (std::size_t r = 0; r < n; ++r) y[r] = labels[r] == classes_[ci] ? 1.0 : -1.0;
    const std::vector<double> w = train_binary(x, y, cfg);
    std::copy(w.begin(), w.end(), weights_.row(ci).data());
  }
}

std::vector<double> LinearSvm::scores(std::span<const double> x) const {
  const std::size_t d = mean_.size();
  if (x.size() != d) throw ShapeMismatch("LinearSvm: feature count differs from training");
  std::vector<double> z(d + 1, 1.0);
  for (std::size_t c = 0; c < d; ++c) z[c] = (x[c] - mean_[c]) * scale_[c];
  std::vector<double> out(classes_.size());
  for (std::size_t ci = 0; ci < classes_.size(); ++ci)
    out[ci] = simd::active().dot(weights_.row(ci).data(), z.data(), d + 1);
  return out;
}

std::uint32_t LinearSvm::predict(std::span<const double> x) const {
  if (classes_.empty()) throw InvalidInput("LinearSvm: not trained");
  const std::vector<double> s = scores(x);
  const auto best = std::max_element(s.begin(), s.end());  // first maximum = smallest label
  return classes_[static_cast<std::size_t>(best - s.begin())];
}

}  // namespace msr
