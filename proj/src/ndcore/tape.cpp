#include "regraft/ndcore/tape.hpp"

#include <string>

#include "regraft/error.hpp"

namespace regraft::nd {

void Tape::check(Var v) const {
  if (v.tape_ != this || v.index_ >= nodes_.size()) {
    throw InvalidArgument("Tape: variable is not registered on this tape");
  }
}

Var Tape::leaf(Tensor2 value) {
  if (!value.all_finite()) throw NumericError("Tape::leaf: non-finite value");
  nodes_.push_back(Node{std::move(value), {}, {}, true, false});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Tensor2 value) {
  if (!value.all_finite()) throw NumericError("Tape::constant: non-finite value");
  nodes_.push_back(Node{std::move(value), {}, {}, false, false});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Tensor2 value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (Var in : inputs) {
    check(in);
    needs = needs || node(in).requires_grad;
  }
  if (!value.all_finite()) throw NumericError("Tape: operation produced a non-finite value");
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, needs, false});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Tensor2& Tape::value(Var v) const {
  check(v);
  return node(v).value;
}

bool Tape::requires_grad(Var v) const {
  check(v);
  return node(v).requires_grad;
}

Tensor2* Tape::grad_buffer(Var v) {
  check(v);
  Node& n = node(v);
  if (!n.requires_grad) return nullptr;
  if (!n.grad_live) {
    n.grad = Tensor2(n.value.rows(), n.value.cols());
    n.grad_live = true;
  }
  return &n.grad;
}

void Tape::accumulate(Var v, const Tensor2& contribution) {
  Tensor2* g = grad_buffer(v);
  if (!g) return;
  if (!g->same_shape(contribution)) throw InvalidArgument("Tape::accumulate: shape mismatch");
  auto dst = g->values();
  auto src = contribution.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var loss) {
  check(loss);
  const Node& l = node(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1) {
    throw InvalidArgument("Tape::backward: loss must be a 1x1 scalar");
  }
  for (Node& n : nodes_) {
    n.grad_live = false;
    n.grad = Tensor2();
  }
  if (!l.requires_grad) return;
  node(loss).grad = Tensor2(1, 1, 1.0);
  node(loss).grad_live = true;
  for (std::size_t i = loss.index_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad_live || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

Tensor2 Tape::grad(Var v) const {
  check(v);
  const Node& n = node(v);
  if (!n.grad_live) return Tensor2(n.value.rows(), n.value.cols());
  return n.grad;
}

}  // namespace regraft::nd
