#include "regraft/ndcore/optimizer.hpp"

#include <cmath>
#include <string>

#include "regraft/error.hpp"

namespace regraft::nd {

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "gd" || name == "vanilla-gd") return OptimizerKind::VanillaGd;
  if (name == "rmsprop") return OptimizerKind::RmsProp;
  throw InvalidArgument("unknown optimizer '" + std::string(name) + "' (expected gd|rmsprop)");
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::VanillaGd ? "gd" : "rmsprop";
}

void OptimizerSettings::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw InvalidArgument("optimizer: learning rate must be finite and >= 0");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("optimizer: rmsprop decay must lie in (0,1)");
  if (!(eps > 0.0)) throw InvalidArgument("optimizer: eps must be positive");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("optimizer: weight decay must be >= 0");
}

Optimizer::Optimizer(OptimizerSettings settings) : settings_(settings) { settings_.validate(); }

void Optimizer::ensure_size(std::size_t n) {
  if (settings_.kind != OptimizerKind::RmsProp) return;
  if (accum_.empty()) {
    accum_.assign(n, 0.0);
  } else if (accum_.size() != n) {
    throw InvalidArgument("optimizer: state initialized for " + std::to_string(accum_.size()) +
                          " parameters, got " + std::to_string(n));
  }
}

void Optimizer::update(std::span<double> params, std::span<const double> grads, std::size_t offset) {
  const double lr = settings_.learning_rate;
  const double wd = settings_.weight_decay;
  if (settings_.kind == OptimizerKind::VanillaGd) {
    if (wd == 0.0) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] = params[i] - lr * grads[i];
    } else {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] = params[i] - lr * (grads[i] + wd * params[i]);
    }
    return;
  }
  const double rho = settings_.rho;
  const double eps = settings_.eps;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& v = accum_[offset + i];
    v = rho * v + (1.0 - rho) * g * g;
    params[i] = params[i] - lr * (g + wd * params[i]) / std::sqrt(v + eps);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size()) {
    throw InvalidArgument("optimizer: " + std::to_string(params.size()) + " params but " +
                          std::to_string(grads.size()) + " gradients");
  }
  ensure_size(params.size());
  update(params, grads, 0);
}

void Optimizer::step(std::vector<Tensor2>& params, const std::vector<Tensor2>& grads) {
  if (params.size() != grads.size()) throw InvalidArgument("optimizer: parameter/gradient count mismatch");
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].same_shape(grads[i])) throw InvalidArgument("optimizer: parameter/gradient shape mismatch");
    total += params[i].size();
  }
  ensure_size(total);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i].values(), grads[i].values(), offset);
    offset += params[i].size();
  }
}

}  // namespace regraft::nd
