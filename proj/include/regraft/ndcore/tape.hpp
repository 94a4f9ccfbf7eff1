#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "regraft/ndcore/tensor.hpp"

namespace regraft::nd {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;

  Tape& tape() const;
  const Tensor2& value() const;
  std::uint32_t index() const noexcept { return index_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
};

// Reverse-mode tape. Rebuilt for every forward pass; nodes are appended in
// evaluation order so reverse insertion order is a valid topological order.
class Tape {
 public:
  // Receives the gradient flowing into the node and pushes contributions to
  // its inputs through Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Tensor2& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable input (parameters, optimized inputs).
  Var leaf(Tensor2 value);
  // Input with no gradient.
  Var constant(Tensor2 value);
  // Throws NumericError if `value` contains NaN/Inf.
  Var record(Tensor2 value, std::initializer_list<Var> inputs, BackwardFn backward);

  const Tensor2& value(Var v) const;
  bool requires_grad(Var v) const;

  // Adds `contribution` into the gradient of `v` (no-op for constants).
  void accumulate(Var v, const Tensor2& contribution);
  // Writable zero-initialized gradient buffer, or nullptr for constants.
  Tensor2* grad_buffer(Var v);

  // Seeds d(loss)/d(loss) = 1 and replays. `loss` must be 1x1.
  void backward(Var loss);

  // Gradient of the last backward() w.r.t. `v`; zero when `v` is not on a path
  // to the loss. Throws InvalidArgument for handles from another tape.
  Tensor2 grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool grad_live = false;
  };

  void check(Var v) const;
  Node& node(Var v) { return nodes_[v.index_]; }
  const Node& node(Var v) const { return nodes_[v.index_]; }

  std::vector<Node> nodes_;
};

inline Tape& Var::tape() const { return *tape_; }
inline const Tensor2& Var::value() const { return tape_->value(*this); }

}  // namespace regraft::nd
