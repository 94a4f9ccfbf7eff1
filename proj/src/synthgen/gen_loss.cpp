#include "regraft/synthgen/gen_loss.hpp"

#include <string>

#include "regraft/error.hpp"
#include "regraft/ndcore/ops.hpp"

namespace regraft::synth {

Discrepancy parse_discrepancy(std::string_view s) {
  if (s == "squared") return Discrepancy::Squared;
  if (s == "logcosh") return Discrepancy::LogCosh;
  throw InvalidArgument("unknown discrepancy '" + std::string(s) + "' (expected squared|logcosh)");
}

InputPenalty parse_input_penalty(std::string_view s) {
  if (s == "l2-squared") return InputPenalty::L2Squared;
  if (s == "l1") return InputPenalty::L1;
  throw InvalidArgument("unknown input penalty '" + std::string(s) + "' (expected l2-squared|l1)");
}

OutputPenalty parse_output_penalty(std::string_view s) {
  if (s == "none") return OutputPenalty::None;
  if (s == "student-squared") return OutputPenalty::StudentSquared;
  if (s == "teacher-random-target") return OutputPenalty::TeacherToRandomTarget;
  throw InvalidArgument("unknown output penalty '" + std::string(s) +
                        "' (expected none|student-squared|teacher-random-target)");
}

RandomTargetPolicy parse_random_target(std::string_view s) {
  if (s == "none") return RandomTargetPolicy::None;
  if (s == "integer-uniform") return RandomTargetPolicy::IntegerUniform;
  if (s == "real-uniform") return RandomTargetPolicy::RealUniform;
  throw InvalidArgument("unknown random target policy '" + std::string(s) +
                        "' (expected none|integer-uniform|real-uniform)");
}

std::string_view to_string(Discrepancy v) { return v == Discrepancy::Squared ? "squared" : "logcosh"; }
std::string_view to_string(InputPenalty v) { return v == InputPenalty::L2Squared ? "l2-squared" : "l1"; }
std::string_view to_string(OutputPenalty v) {
  switch (v) {
    case OutputPenalty::None: return "none";
    case OutputPenalty::StudentSquared: return "student-squared";
    case OutputPenalty::TeacherToRandomTarget: return "teacher-random-target";
  }
  return "none";
}
std::string_view to_string(RandomTargetPolicy v) {
  switch (v) {
    case RandomTargetPolicy::None: return "none";
    case RandomTargetPolicy::IntegerUniform: return "integer-uniform";
    case RandomTargetPolicy::RealUniform: return "real-uniform";
  }
  return "none";
}

void GenLossSpec::validate() const {
  if (!(epsilon >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0))
    throw InvalidArgument("gen loss: term weights must be >= 0");
  const bool any = epsilon > 0.0 || beta > 0.0 || (gamma > 0.0 && output_penalty != OutputPenalty::None);
  if (!any) throw InvalidArgument("gen loss: at least one term needs a positive weight");
  const bool wants_target = output_penalty == OutputPenalty::TeacherToRandomTarget;
  if (wants_target != (random_target != RandomTargetPolicy::None)) {
    throw InvalidArgument("gen loss: a random-target policy is required exactly when the output penalty is "
                          "teacher-random-target");
  }
  if (penalize_input_as_output && output_penalty != OutputPenalty::StudentSquared)
    throw InvalidArgument("gen loss: the input-as-output reading replaces the student-squared penalty");
}

std::optional<double> draw_random_target(RandomTargetPolicy policy, nd::Rng& rng) {
  switch (policy) {
    case RandomTargetPolicy::None: return std::nullopt;
    case RandomTargetPolicy::IntegerUniform: return static_cast<double>(rng.uniform_int(10));
    case RandomTargetPolicy::RealUniform: return rng.uniform();
  }
  return std::nullopt;
}

Var gen_loss_rows(const GenLossSpec& spec, Var x, Var teacher_out, Var student_out, std::optional<double> y_rand) {
  std::optional<Var> total;
  auto add_term = [&](Var term) { total = total ? nd::add(*total, term) : term; };

  if (spec.epsilon > 0.0) {
    Var diff = nd::sub(teacher_out, student_out);
    Var disc = spec.discrepancy == Discrepancy::Squared ? nd::square(diff) : nd::logcosh(diff);
    add_term(nd::scale(disc, -spec.epsilon));
  }
  if (spec.beta > 0.0) {
    Var pen = nd::row_sum(spec.input_penalty == InputPenalty::L2Squared ? nd::square(x) : nd::abs(x));
    add_term(nd::scale(pen, spec.beta));
  }
  if (spec.gamma > 0.0 && spec.output_penalty != OutputPenalty::None) {
    Var out;
    if (spec.output_penalty == OutputPenalty::TeacherToRandomTarget) {
      if (!y_rand) throw InvalidArgument("gen loss: teacher-random-target penalty needs a drawn y_rand");
      out = nd::square(nd::add_scalar(teacher_out, -*y_rand));
    } else if (spec.penalize_input_as_output) {
      out = nd::row_sum(nd::square(x));
    } else {
      out = nd::square(student_out);
    }
    add_term(nd::scale(out, spec.gamma));
  }
  if (!total) throw InvalidArgument("gen loss: no active terms");
  return *total;
}

std::vector<double> gen_loss_per_row(const GenLossSpec& spec, const Tensor2& x, const models::TeacherOracle& teacher,
                                     const nd::DifferentiableModel& student, std::optional<double> y_rand) {
  nd::Tape tape;
  Var xv = tape.constant(x);
  Var t = tape.constant(teacher.predict(x));
  Var s = student.apply(xv);
  const Tensor2& rows = gen_loss_rows(spec, xv, t, s, y_rand).value();
  return {rows.values().begin(), rows.values().end()};
}

double gen_loss(const GenLossSpec& spec, const Tensor2& x, const models::TeacherOracle& teacher,
                const nd::DifferentiableModel& student, std::optional<double> y_rand) {
  nd::Tape tape;
  Var xv = tape.constant(x);
  Var t = tape.constant(teacher.predict(x));
  Var s = student.apply(xv);
  return nd::mean_all(gen_loss_rows(spec, xv, t, s, y_rand)).value()[0];
}

Var gen_loss_on_tape(const GenLossSpec& spec, Var x, const models::TeacherOracle& teacher,
                     const nd::DifferentiableModel& student, std::optional<double> y_rand) {
  const nd::DifferentiableModel& tm = teacher.differentiable();
  Var t = tm.apply(x);
  Var s = student.apply(x);
  return nd::mean_all(gen_loss_rows(spec, x, t, s, y_rand));
}

GenLossGradient gen_loss_with_gradient(const GenLossSpec& spec, const Tensor2& x, const models::TeacherOracle& teacher,
                                       const nd::DifferentiableModel& student, std::optional<double> y_rand) {
  if (!teacher.gradient_capable())
    throw CapabilityError("gen loss gradient requested from black-box teacher '" + teacher.kind() + "'");
  nd::Tape tape;
  Var xv = tape.leaf(x);
  Var loss = gen_loss_on_tape(spec, xv, teacher, student, y_rand);
  tape.backward(loss);
  return {loss.value()[0], tape.grad(xv)};
}

}  // namespace regraft::synth
