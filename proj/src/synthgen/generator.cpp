#include "regraft/synthgen/generator.hpp"

#include "regraft/error.hpp"
#include "regraft/ndcore/tape.hpp"

namespace regraft::synth {

Tensor2 draw_latent(std::size_t batch, std::size_t latent_dim, nd::Rng& rng) {
  Tensor2 z(batch, latent_dim);
  for (double& v : z.values()) v = rng.normal();
  return z;
}

GeneratorGradient generator_loss_gradient(const nd::DifferentiableModel& generator, const Tensor2& z,
                                          const models::TeacherOracle& teacher, const nd::DifferentiableModel& student,
                                          const GenLossSpec& loss, std::optional<double> y_rand) {
  if (!teacher.gradient_capable())
    throw CapabilityError("generator training needs a gradient-capable teacher (got " + teacher.kind() + ")");
  if (generator.output_dim() != student.input_dim())
    throw InvalidArgument("generator output width does not match the student input dimension");
  nd::Tape tape;
  const auto params = generator.bind(tape, true);
  Var x = generator.forward(tape.constant(z), params);
  Var l = gen_loss_on_tape(loss, x, teacher, student, y_rand);
  tape.backward(l);
  GeneratorGradient out;
  out.value = l.value()[0];
  out.grads.reserve(params.size());
  for (const Var& p : params) out.grads.push_back(tape.grad(p));
  return out;
}

GeneratorTrainer::GeneratorTrainer(std::unique_ptr<nd::DifferentiableModel> generator, nd::OptimizerSettings settings)
    : generator_(std::move(generator)), optimizer_(settings) {
  if (!generator_) throw InvalidArgument("generator trainer: null generator");
}

GeneratorRound GeneratorTrainer::round(const models::TeacherOracle& teacher, const nd::DifferentiableModel& student,
                                       const GenLossSpec& loss, std::size_t batch, nd::Rng& rng, bool reemit) {
  if (batch == 0) throw InvalidArgument("generator round: batch size must be >= 1");
  loss.validate();
  GeneratorRound r;
  r.z = draw_latent(batch, generator_->input_dim(), rng);
  r.y_rand = draw_random_target(loss.random_target, rng);
  if (!reemit) r.x_g = generator_->predict(r.z);
  auto g = generator_loss_gradient(*generator_, r.z, teacher, student, loss, r.y_rand);
  r.loss = g.value;
  optimizer_.step(generator_->parameters(), g.grads);
  if (reemit) r.x_g = generator_->predict(r.z);
  return r;
}

Tensor2 GeneratorTrainer::emit(std::size_t batch, nd::Rng& rng) const {
  return generator_->predict(draw_latent(batch, generator_->input_dim(), rng));
}

}  // namespace regraft::synth
