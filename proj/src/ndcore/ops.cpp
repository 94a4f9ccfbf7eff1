#include "regraft/ndcore/ops.hpp"

#include <cmath>
#include <numbers>

#include "regraft/error.hpp"

namespace regraft::nd {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw InvalidArgument(std::string(op) + ": operands live on different tapes");
  }
}

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}

// Elementwise unary op; `deriv(x, y)` is dy/dx given input and output. The
// local derivative is evaluated during the forward pass and kept for backward.
template <class F, class D>
Var unary(Var a, F f, D deriv) {
  if (!a.valid()) throw InvalidArgument("unary op on invalid variable");
  const Tensor2& x = a.value();
  Tensor2 y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  Tape& tape = a.tape();
  if (!tape.requires_grad(a)) return tape.record(std::move(y), {a}, {});
  Tensor2 dydx(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) dydx[i] = deriv(x[i], y[i]);
  return tape.record(std::move(y), {a}, [a, dydx = std::move(dydx)](Tape& t, const Tensor2& g) {
    Tensor2* ga = t.grad_buffer(a);
    if (!ga) return;
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * dydx[i];
  });
}

}  // namespace

double logcosh(double d) {
  const double a = std::fabs(d);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor2 y = a.value();
  const Tensor2& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor2& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Tensor2 y = a.value();
  const Tensor2& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor2& g) {
    t.accumulate(a, g);
    if (Tensor2* gb = t.grad_buffer(b)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor2 y = a.value();
  const Tensor2& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor2& g) {
    if (Tensor2* ga = t.grad_buffer(a)) {
      const Tensor2& bv = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (Tensor2* gb = t.grad_buffer(b)) {
      const Tensor2& av = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double c) {
  Tensor2 y = a.value();
  for (double& v : y.values()) v *= c;
  return a.tape().record(std::move(y), {a}, [a, c](Tape& t, const Tensor2& g) {
    if (Tensor2* ga = t.grad_buffer(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += c * g[i];
    }
  });
}

Var add_scalar(Var a, double c) {
  Tensor2 y = a.value();
  for (double& v : y.values()) v += c;
  return a.tape().record(std::move(y), {a}, [a](Tape& t, const Tensor2& g) { t.accumulate(a, g); });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  Tensor2 y = matmul(a.value(), b.value());
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor2& g) {
    if (t.requires_grad(a)) t.accumulate(a, matmul_nt(g, t.value(b)));
    if (t.requires_grad(b)) t.accumulate(b, matmul_tn(t.value(a), g));
  });
}

Var add_bias(Var x, Var b) {
  require_same_tape(x, b, "add_bias");
  const Tensor2& bv = b.value();
  Tensor2 y = x.value();
  if (bv.rows() != 1 || bv.cols() != y.cols()) throw InvalidArgument("add_bias: bias must be 1 x cols");
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
  }
  return x.tape().record(std::move(y), {x, b}, [x, b](Tape& t, const Tensor2& g) {
    t.accumulate(x, g);
    if (Tensor2* gb = t.grad_buffer(b)) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto row = g.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) (*gb)[c] += row[c];
      }
    }
  });
}

Var mul_row(Var x, Var r) {
  require_same_tape(x, r, "mul_row");
  const Tensor2& rv = r.value();
  Tensor2 y = x.value();
  if (rv.rows() != 1 || rv.cols() != y.cols()) throw InvalidArgument("mul_row: factor must be 1 x cols");
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto row = y.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] *= rv[c];
  }
  return x.tape().record(std::move(y), {x, r}, [x, r](Tape& t, const Tensor2& g) {
    const Tensor2& xv = t.value(x);
    const Tensor2& rv = t.value(r);
    if (Tensor2* gx = t.grad_buffer(x)) {
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t c = 0; c < g.cols(); ++c) (*gx)(i, c) += g(i, c) * rv[c];
    }
    if (Tensor2* gr = t.grad_buffer(r)) {
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t c = 0; c < g.cols(); ++c) (*gr)[c] += g(i, c) * xv(i, c);
    }
  });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var softplus(Var a) {
  return unary(a, [](double x) { return softplus(x); },
               [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var abs(Var a) {
  return unary(a, [](double x) { return std::fabs(x); },
               [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var logcosh(Var a) {
  return unary(a, [](double x) { return logcosh(x); }, [](double x, double) { return std::tanh(x); });
}

Var sum_all(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape().record(Tensor2(1, 1, s), {a}, [a](Tape& t, const Tensor2& g) {
    if (Tensor2* ga = t.grad_buffer(a)) {
      for (double& v : ga->values()) v += g[0];
    }
  });
}

Var mean_all(Var a) {
  const Tensor2& x = a.value();
  if (x.empty()) throw InvalidArgument("mean_all: empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  const double n = static_cast<double>(x.size());
  return a.tape().record(Tensor2(1, 1, s / n), {a}, [a, n](Tape& t, const Tensor2& g) {
    if (Tensor2* ga = t.grad_buffer(a)) {
      const double share = g[0] / n;
      for (double& v : ga->values()) v += share;
    }
  });
}

Var row_sum(Var a) {
  const Tensor2& x = a.value();
  Tensor2 y(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (double v : x.row(r)) s += v;
    y[r] = s;
  }
  return a.tape().record(std::move(y), {a}, [a](Tape& t, const Tensor2& g) {
    if (Tensor2* ga = t.grad_buffer(a)) {
      for (std::size_t r = 0; r < ga->rows(); ++r)
        for (double& v : ga->row(r)) v += g[r];
    }
  });
}

Var sq_dist(Var x, Var c) {
  require_same_tape(x, c, "sq_dist");
  const Tensor2& xv = x.value();
  const Tensor2& cv = c.value();
  if (xv.cols() != cv.cols()) throw InvalidArgument("sq_dist: dimension mismatch");
  const std::size_t n = xv.rows(), k = cv.rows(), d = xv.cols();
  Tensor2 y(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < d; ++l) {
        const double diff = xv(i, l) - cv(j, l);
        s += diff * diff;
      }
      y(i, j) = s;
    }
  }
  return x.tape().record(std::move(y), {x, c}, [x, c, n, k, d](Tape& t, const Tensor2& g) {
    const Tensor2& xv = t.value(x);
    const Tensor2& cv = t.value(c);
    Tensor2* gx = t.grad_buffer(x);
    Tensor2* gc = t.grad_buffer(c);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double gij = 2.0 * g(i, j);
        if (gij == 0.0) continue;
        for (std::size_t l = 0; l < d; ++l) {
          const double diff = gij * (xv(i, l) - cv(j, l));
          if (gx) (*gx)(i, l) += diff;
          if (gc) (*gc)(j, l) -= diff;
        }
      }
    }
  });
}

}  // namespace regraft::nd
