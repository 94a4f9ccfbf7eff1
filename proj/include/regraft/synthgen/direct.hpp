#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "regraft/models/teacher.hpp"
#include "regraft/synthgen/de.hpp"
#include "regraft/synthgen/gen_loss.hpp"
#include "regraft/synthgen/sampler.hpp"

namespace regraft::synth {

enum class OptimizeMethod { Gd, RmsProp, DifferentialEvolution };

OptimizeMethod parse_optimize_method(std::string_view s);
std::string_view to_string(OptimizeMethod m);

struct OptimizeSpec {
  OptimizeMethod method = OptimizeMethod::RmsProp;
  double eta = 0.1;
  std::size_t steps = 2;  // gradient steps; DE uses de.iterations
  double rho = 0.99;
  double eps = 1e-8;
  DeSettings de;

  void validate() const;
};

struct TraceStep {
  Tensor2 x;
  double loss = 0.0;
  Tensor2 grad;  // gradient at x; empty for differential evolution
};

struct OptimizeResult {
  Tensor2 x;
  std::vector<TraceStep> trace;  // entry 0 is the starting batch
  OptimizeMethod method = OptimizeMethod::Gd;
  double eta = 0.0;
  std::optional<double> y_rand;
};

// Moves x0 toward higher teacher/student disagreement by minimizing the
// generator loss w.r.t. the inputs.
//   gd:      x <- x - eta * dL/dx, steps times, on the batch-mean loss
//   rmsprop: the RMSProp rule applied to x
//   differential evolution: each row is optimized independently with its own
//     sub-population (row of x0 plus population-1 draws from `init_sampler`),
//     projected through `init_sampler`'s constraints.
// y_rand (when the loss uses one) is drawn once from `rng` for the whole batch.
OptimizeResult direct_optimize(const Tensor2& x0, const models::TeacherOracle& teacher,
                               const nd::DifferentiableModel& student, const GenLossSpec& loss,
                               const OptimizeSpec& opt, nd::Rng& rng, Sampler* init_sampler = nullptr);

}  // namespace regraft::synth
