#include "regraft/ndcore/loss.hpp"

#include <string>

#include "regraft/error.hpp"
#include "regraft/ndcore/ops.hpp"

namespace regraft::nd {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "mse") return LossKind::Mse;
  if (name == "logcosh") return LossKind::LogCosh;
  throw InvalidArgument("unknown loss kind '" + std::string(name) + "' (expected mse|logcosh)");
}

std::string_view to_string(LossKind kind) { return kind == LossKind::Mse ? "mse" : "logcosh"; }

double loss_eval(LossKind kind, const Tensor2& pred, const Tensor2& target) {
  if (!pred.same_shape(target)) throw InvalidArgument("loss_eval: pred and target shapes differ");
  if (pred.empty()) throw InvalidArgument("loss_eval: empty batch");
  if (!pred.all_finite() || !target.all_finite()) throw NumericError("loss_eval: non-finite input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += kind == LossKind::Mse ? d * d : logcosh(d);
  }
  return s / static_cast<double>(pred.size());
}

Var loss(LossKind kind, Var pred, Var target) {
  if (!pred.value().same_shape(target.value())) throw InvalidArgument("loss: pred and target shapes differ");
  Var d = sub(pred, target);
  return mean_all(kind == LossKind::Mse ? square(d) : logcosh(d));
}

}  // namespace regraft::nd
