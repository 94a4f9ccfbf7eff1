#include "regraft/distill/distill.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "regraft/error.hpp"
#include "regraft/ndcore/ops.hpp"
#include "regraft/synthgen/generator.hpp"

namespace regraft::distill {

AlphaKind parse_alpha_kind(std::string_view s) {
  if (s == "constant") return AlphaKind::Constant;
  if (s == "linear" || s == "linear-decreasing") return AlphaKind::LinearDecreasing;
  throw InvalidArgument("unknown alpha schedule '" + std::string(s) + "' (expected constant|linear)");
}

std::string_view to_string(AlphaKind k) { return k == AlphaKind::Constant ? "constant" : "linear"; }

void AlphaSchedule::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (kind == AlphaKind::Constant && !in01(value)) throw InvalidArgument("alpha value must lie in [0,1]");
  if (kind == AlphaKind::LinearDecreasing && !(in01(start) && in01(end)))
    throw InvalidArgument("alpha start/end must lie in [0,1]");
}

double alpha_at(const AlphaSchedule& schedule, std::size_t epoch, std::size_t t_max) {
  double a = schedule.value;
  if (schedule.kind == AlphaKind::LinearDecreasing) {
    a = t_max == 0 ? schedule.start
                   : schedule.start + (schedule.end - schedule.start) * static_cast<double>(epoch) /
                                          static_cast<double>(t_max);
  }
  return std::clamp(a, 0.0, 1.0);
}

double combined_loss(double alpha, double loss_g, double loss_p) {
  if (alpha == 1.0) return loss_g;
  if (alpha == 0.0) return loss_p;
  return alpha * loss_g + (1.0 - alpha) * loss_p;
}

Strategy parse_strategy(std::string_view s) {
  if (s == "random") return Strategy::Random;
  if (s == "generator") return Strategy::Generator;
  if (s == "direct") return Strategy::Direct;
  throw InvalidArgument("unknown synthetic strategy '" + std::string(s) + "' (expected random|generator|direct)");
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Generator: return "generator";
    case Strategy::Direct: return "direct";
  }
  return "random";
}

void DistillConfig::validate() const {
  if (batches_per_epoch == 0) throw InvalidArgument("batches per epoch must be >= 1");
  if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
  if (validation_every == 0) throw InvalidArgument("validation cadence must be >= 1");
  alpha.validate();
  student_optimizer.validate();
  xp_sampler.validate();
  synth.sampler.validate();
  synth.loss.validate();
  if (synth.strategy == Strategy::Direct) synth.optimize.validate();
  if (synth.strategy == Strategy::Generator) {
    synth.generator_optimizer.validate();
    if (synth.generator_rounds == 0) throw InvalidArgument("generator rounds per batch must be >= 1");
  }
}

Metric parse_metric(std::string_view s) {
  if (s == "rmse") return Metric::Rmse;
  if (s == "mae") return Metric::Mae;
  throw InvalidArgument("unknown metric '" + std::string(s) + "' (expected rmse|mae)");
}

std::string_view to_string(Metric m) { return m == Metric::Rmse ? "rmse" : "mae"; }

double score(const Tensor2& pred, const Tensor2& target, Metric metric) {
  if (!pred.same_shape(target) || pred.cols() != 1)
    throw InvalidArgument("evaluate: prediction/target shape mismatch");
  if (pred.empty()) throw InvalidArgument("evaluate: empty dataset");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    acc += metric == Metric::Rmse ? e * e : std::abs(e);
  }
  acc /= static_cast<double>(pred.size());
  return metric == Metric::Rmse ? std::sqrt(acc) : acc;
}

double evaluate(const nd::DifferentiableModel& model, const data::Dataset& dataset, Metric metric) {
  return score(model.predict(dataset.features), dataset.targets, metric);
}

double evaluate(const models::TeacherOracle& model, const data::Dataset& dataset, Metric metric) {
  return score(model.predict(dataset.features), dataset.targets, metric);
}

namespace {

bool needs_teacher_gradients(const SynthSpec& s) {
  if (s.strategy == Strategy::Generator) return true;
  return s.strategy == Strategy::Direct && s.optimize.method != synth::OptimizeMethod::DifferentialEvolution;
}

}  // namespace

DistillResult distill_run(const DistillConfig& config, const models::TeacherOracle& teacher,
                          const nd::DifferentiableModel& student, const data::Dataset* validation,
                          const EpochCallback& on_epoch) {
  config.validate();
  const std::size_t d = student.input_dim();
  if (teacher.input_dim() != d) throw InvalidArgument("teacher and student input dimensions differ");
  if (config.xp_sampler.dim != d || config.synth.sampler.dim != d)
    throw InvalidArgument("sampler dimension does not match the student input dimension");
  if (validation && validation->dim() != d) throw InvalidArgument("validation set width does not match the student");

  const AlphaSchedule& sched = config.alpha;
  const bool skip_g = sched.is_constant(0.0);
  const bool skip_p = sched.is_constant(1.0);
  if (!skip_g && needs_teacher_gradients(config.synth) && !teacher.gradient_capable())
    throw CapabilityError("strategy '" + std::string(to_string(config.synth.strategy)) +
                          "' needs teacher gradients but the teacher is " + teacher.kind());

  DistillResult result;
  auto current = student.clone();
  result.best = student.clone();
  if (config.epochs == 0) {
    result.final_model = std::move(current);
    return result;
  }

  nd::Rng rng_p(config.data_seed);
  nd::Rng rng_s(config.synth_seed);
  synth::Sampler xp_sampler(config.xp_sampler);
  synth::Sampler x0_sampler(config.synth.sampler);
  nd::Optimizer optimizer(config.student_optimizer);

  std::optional<synth::GeneratorTrainer> generator;
  if (config.synth.strategy == Strategy::Generator && !skip_g) {
    models::GeneratorSpec gs = config.synth.generator;
    gs.output_dim = d;
    generator.emplace(models::build_generator(gs, config.init_seed), config.synth.generator_optimizer);
  }

  const std::size_t m = config.batch_size;
  const std::size_t m_g = config.double_at_edge && skip_p ? 2 * m : m;
  const std::size_t m_p = config.double_at_edge && skip_g ? 2 * m : m;

  auto make_xg = [&](const nd::DifferentiableModel& s) -> Tensor2 {
    switch (config.synth.strategy) {
      case Strategy::Random:
        return x0_sampler.draw(m_g, rng_s);
      case Strategy::Generator: {
        synth::GeneratorRound r;
        for (std::size_t k = 0; k < config.synth.generator_rounds; ++k)
          r = generator->round(teacher, s, config.synth.loss, m_g, rng_s, config.synth.reemit_after_update);
        return std::move(r.x_g);
      }
      case Strategy::Direct: {
        Tensor2 x0 = x0_sampler.draw(m_g, rng_s);
        return synth::direct_optimize(x0, teacher, s, config.synth.loss, config.synth.optimize, rng_s, &x0_sampler).x;
      }
    }
    return {};
  };

  const auto t_start = std::chrono::steady_clock::now();
  if (on_epoch) on_epoch(0, *current);

  for (std::size_t e = 0; e < config.epochs; ++e) {
    const double alpha = alpha_at(sched, e, config.epochs);
    double sum_l = 0.0, sum_g = 0.0, sum_p = 0.0;
    for (std::size_t b = 0; b < config.batches_per_epoch; ++b) {
      nd::Tape tape;
      const auto params = current->bind(tape, true);
      Var lg, lp;
      if (!skip_g) {
        Tensor2 xg = make_xg(*current);
        Tensor2 tg = teacher.predict(xg);
        lg = nd::loss(config.student_loss, current->forward(tape.constant(std::move(xg)), params),
                      tape.constant(std::move(tg)));
        sum_g += lg.value()[0];
      }
      if (!skip_p) {
        Tensor2 xp = xp_sampler.draw(m_p, rng_p);
        Tensor2 tp = teacher.predict(xp);
        lp = nd::loss(config.student_loss, current->forward(tape.constant(std::move(xp)), params),
                      tape.constant(std::move(tp)));
        sum_p += lp.value()[0];
      }
      Var total = skip_g ? lp : skip_p ? lg : nd::add(nd::scale(lg, alpha), nd::scale(lp, 1.0 - alpha));
      sum_l += total.value()[0];
      tape.backward(total);
      std::vector<Tensor2> grads;
      grads.reserve(params.size());
      for (const Var& p : params) grads.push_back(tape.grad(p));
      optimizer.step(current->parameters(), grads);
    }

    const double nb = static_cast<double>(config.batches_per_epoch);
    MetricsRow row;
    row.epoch = e + 1;
    row.alpha = alpha;
    row.loss_combined = sum_l / nb;
    if (!skip_g) row.loss_xg = sum_g / nb;
    if (!skip_p) row.loss_xp = sum_p / nb;
    if (validation && validation->size() > 0 && row.epoch % config.validation_every == 0) {
      const double v = evaluate(*current, *validation, Metric::Rmse);
      row.val_rmse = v;
      if (!result.best_val_rmse || v < *result.best_val_rmse) {
        result.best_val_rmse = v;
        result.best_epoch = row.epoch;
        result.best = current->clone();
      }
    }
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    result.metrics.push_back(row);
    if (on_epoch) on_epoch(row.epoch, *current);
  }

  if (!result.best_val_rmse) {
    result.best = current->clone();
    result.best_epoch = config.epochs;
  }
  result.final_model = std::move(current);
  return result;
}

}  // namespace regraft::distill
