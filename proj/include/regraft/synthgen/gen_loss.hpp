#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "regraft/models/teacher.hpp"
#include "regraft/ndcore/model.hpp"
#include "regraft/ndcore/rng.hpp"

namespace regraft::synth {

using nd::Tensor2;
using nd::Var;

enum class Discrepancy { Squared, LogCosh };
enum class InputPenalty { L2Squared, L1 };
enum class OutputPenalty { None, StudentSquared, TeacherToRandomTarget };
enum class RandomTargetPolicy { None, IntegerUniform, RealUniform };

Discrepancy parse_discrepancy(std::string_view s);
InputPenalty parse_input_penalty(std::string_view s);
OutputPenalty parse_output_penalty(std::string_view s);
RandomTargetPolicy parse_random_target(std::string_view s);
std::string_view to_string(Discrepancy v);
std::string_view to_string(InputPenalty v);
std::string_view to_string(OutputPenalty v);
std::string_view to_string(RandomTargetPolicy v);

// Per-row objective for synthetic inputs x (lower is better for the search):
//   -epsilon * disc(T(x) - S(x)) + beta * pen(x) + gamma * outpen
// averaged over the batch. outpen is S(x)^2, (T(x) - y_rand)^2, or, with
// `penalize_input_as_output`, |x|^2 (the literal reading with a second
// input penalty in place of the student-output term).
struct GenLossSpec {
  Discrepancy discrepancy = Discrepancy::Squared;
  double epsilon = 1.0;
  InputPenalty input_penalty = InputPenalty::L2Squared;
  double beta = 1e-5;
  OutputPenalty output_penalty = OutputPenalty::StudentSquared;
  double gamma = 1e-5;
  RandomTargetPolicy random_target = RandomTargetPolicy::None;
  bool penalize_input_as_output = false;

  void validate() const;
};

// Draws y_rand once for a batch; nullopt when the policy is None.
std::optional<double> draw_random_target(RandomTargetPolicy policy, nd::Rng& rng);

// Row losses (n x 1) from already-recorded teacher and student outputs.
Var gen_loss_rows(const GenLossSpec& spec, Var x, Var teacher_out, Var student_out, std::optional<double> y_rand);

// Plain evaluation for any teacher; one loss per row.
std::vector<double> gen_loss_per_row(const GenLossSpec& spec, const Tensor2& x, const models::TeacherOracle& teacher,
                                     const nd::DifferentiableModel& student, std::optional<double> y_rand);

double gen_loss(const GenLossSpec& spec, const Tensor2& x, const models::TeacherOracle& teacher,
                const nd::DifferentiableModel& student, std::optional<double> y_rand);

struct GenLossGradient {
  double value = 0.0;
  Tensor2 grad;  // d(mean loss) / dx, same shape as x
};

// Throws CapabilityError when the teacher exposes no gradients.
GenLossGradient gen_loss_with_gradient(const GenLossSpec& spec, const Tensor2& x, const models::TeacherOracle& teacher,
                                       const nd::DifferentiableModel& student, std::optional<double> y_rand);

// Batch-mean loss on a tape where x is itself a recorded value (e.g. a
// generator output). Requires a gradient-capable teacher.
Var gen_loss_on_tape(const GenLossSpec& spec, Var x, const models::TeacherOracle& teacher,
                     const nd::DifferentiableModel& student, std::optional<double> y_rand);

}  // namespace regraft::synth
