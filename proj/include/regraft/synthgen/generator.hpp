#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "regraft/models/teacher.hpp"
#include "regraft/ndcore/optimizer.hpp"
#include "regraft/synthgen/gen_loss.hpp"

namespace regraft::synth {

struct GeneratorRound {
  Tensor2 z;
  Tensor2 x_g;        // emitted batch
  double loss = 0.0;  // generator loss before the update
  std::optional<double> y_rand;
};

// Mean generator loss of G(z) and its gradient w.r.t. G's parameters.
struct GeneratorGradient {
  double value = 0.0;
  std::vector<Tensor2> grads;
};
GeneratorGradient generator_loss_gradient(const nd::DifferentiableModel& generator, const Tensor2& z,
                                          const models::TeacherOracle& teacher, const nd::DifferentiableModel& student,
                                          const GenLossSpec& loss, std::optional<double> y_rand);

// Owns G and its optimizer state across rounds.
class GeneratorTrainer {
 public:
  GeneratorTrainer(std::unique_ptr<nd::DifferentiableModel> generator, nd::OptimizerSettings settings);

  // z ~ N(0, I); one optimizer step on the mean generator loss of G(z). With
  // `reemit` the returned batch is G(z) after the update, otherwise before.
  GeneratorRound round(const models::TeacherOracle& teacher, const nd::DifferentiableModel& student,
                       const GenLossSpec& loss, std::size_t batch, nd::Rng& rng, bool reemit = true);

  // G(z) for fresh z, no update.
  Tensor2 emit(std::size_t batch, nd::Rng& rng) const;

  const nd::DifferentiableModel& generator() const noexcept { return *generator_; }
  nd::DifferentiableModel& generator() noexcept { return *generator_; }

 private:
  std::unique_ptr<nd::DifferentiableModel> generator_;
  nd::Optimizer optimizer_;
};

Tensor2 draw_latent(std::size_t batch, std::size_t latent_dim, nd::Rng& rng);

}  // namespace regraft::synth
