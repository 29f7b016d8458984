#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msr/matrix.hpp"

namespace msr {

struct SvmConfig {
  double c = 1.0;        // hinge-loss weight against 0.5 ||w||^2
  int max_epochs = 2000;
  double tol = 1e-8;     // projected-gradient spread stopping rule
};

/// One-vs-rest linear SVM: hinge loss, L2 regularisation, bias folded in as a
/// constant feature. Inputs are standardised with the training statistics.
/// Each class is trained by dual coordinate descent in a fixed cyclic order.
class LinearSvm {
 public:
  void fit(const Matrix& features, const std::vector<std::uint32_t>& labels, const SvmConfig& cfg = {});

  /// Highest-scoring class; ties go to the smaller label.
  std::uint32_t predict(std::span<const double> x) const;
  std::vector<double> scores(std::span<const double> x) const;

  const std::vector<std::uint32_t>& classes() const { return classes_; }

 private:
  std::vector<std::uint32_t> classes_;
  std::vector<double> mean_, scale_;
  Matrix weights_;  // classes x (d + 1), last column is the bias
};

}  // namespace msr
