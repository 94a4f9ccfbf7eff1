#pragma once

#include <string_view>

#include "regraft/ndcore/tape.hpp"
#include "regraft/ndcore/tensor.hpp"

namespace regraft::nd {

enum class LossKind { Mse, LogCosh };

LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

// Mean over all entries of (pred - target)^2 or log(cosh(pred - target)).
// Throws InvalidArgument on shape mismatch or empty input, NumericError on
// non-finite input.
double loss_eval(LossKind kind, const Tensor2& pred, const Tensor2& target);

// Tape version of loss_eval; produces bitwise the same value.
Var loss(LossKind kind, Var pred, Var target);

}  // namespace regraft::nd
