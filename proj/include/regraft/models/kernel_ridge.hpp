#pragma once

#include <vector>

#include "regraft/ndcore/tensor.hpp"

namespace regraft::models {

// f(q) = sum_i a_i exp(-|q - x_i|^2 / (2 sigma^2)), with a solving (K + lambda I) a = y.
class KernelRidgePredictor {
 public:
  KernelRidgePredictor(nd::Tensor2 support, std::vector<double> dual, double sigma, double lambda);

  nd::Tensor2 predict(const nd::Tensor2& batch) const;

  std::size_t input_dim() const noexcept { return support_.cols(); }
  const nd::Tensor2& support() const noexcept { return support_; }
  const std::vector<double>& dual() const noexcept { return dual_; }
  double sigma() const noexcept { return sigma_; }
  double lambda() const noexcept { return lambda_; }

 private:
  nd::Tensor2 support_;
  std::vector<double> dual_;
  double sigma_;
  double lambda_;
};

// Throws NumericError when the system is singular (only possible with lambda = 0).
KernelRidgePredictor krr_fit(const nd::Tensor2& x, const nd::Tensor2& y, double sigma, double lambda);

}  // namespace regraft::models
