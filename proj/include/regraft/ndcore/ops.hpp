#pragma once

#include "regraft/ndcore/tape.hpp"

// Differentiable primitives. Every op records onto the tape of its inputs.
namespace regraft::nd {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double c);
Var add_scalar(Var a, double c);

Var matmul(Var a, Var b);
// x (n x m) + b (1 x m) broadcast over rows.
Var add_bias(Var x, Var b);
// x (n x m) * r (1 x m) broadcast over rows.
Var mul_row(Var x, Var r);

Var tanh(Var a);
Var relu(Var a);
Var softplus(Var a);
Var exp(Var a);
Var square(Var a);
Var abs(Var a);
Var logcosh(Var a);

Var sum_all(Var a);   // -> 1x1
Var mean_all(Var a);  // -> 1x1
Var row_sum(Var a);   // n x m -> n x 1

// Pairwise squared Euclidean distances: x (n x d), c (k x d) -> n x k.
Var sq_dist(Var x, Var c);

// Scalar helpers shared with the plain evaluation paths.
double logcosh(double d);
double softplus(double x);

}  // namespace regraft::nd
