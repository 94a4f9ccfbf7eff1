#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "regraft/ndcore/tensor.hpp"

namespace regraft::nd {

enum class OptimizerKind { VanillaGd, RmsProp };

OptimizerKind parse_optimizer_kind(std::string_view name);
std::string_view to_string(OptimizerKind kind);

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::RmsProp;
  double learning_rate = 1e-3;
  double rho = 0.99;
  double eps = 1e-8;
  double weight_decay = 0.0;

  void validate() const;
};

// First-order update rules. Weight decay enters as an additive lambda*p term
// on the step direction; the RMSProp accumulator only ever sees the raw
// gradient.
//
//   vanilla-gd: p <- p - lr * (g + lambda*p)
//   rmsprop:    v <- rho*v + (1-rho)*g^2
//               p <- p - lr * (g + lambda*p) / sqrt(v + eps)
class Optimizer {
 public:
  explicit Optimizer(OptimizerSettings settings);

  void step(std::span<double> params, std::span<const double> grads);
  // Parameter tensors are treated as one concatenated vector.
  void step(std::vector<Tensor2>& params, const std::vector<Tensor2>& grads);

  const OptimizerSettings& settings() const noexcept { return settings_; }
  std::span<const double> accumulators() const noexcept { return accum_; }
  void reset() { accum_.clear(); }

 private:
  void ensure_size(std::size_t n);
  void update(std::span<double> params, std::span<const double> grads, std::size_t offset);

  OptimizerSettings settings_;
  std::vector<double> accum_;
};

}  // namespace regraft::nd
