#include "regraft/synthgen/direct.hpp"

#include <string>

#include "regraft/error.hpp"
#include "regraft/ndcore/optimizer.hpp"

namespace regraft::synth {

OptimizeMethod parse_optimize_method(std::string_view s) {
  if (s == "gd") return OptimizeMethod::Gd;
  if (s == "rmsprop") return OptimizeMethod::RmsProp;
  if (s == "differential-evolution" || s == "de") return OptimizeMethod::DifferentialEvolution;
  throw InvalidArgument("unknown optimize method '" + std::string(s) + "' (expected gd|rmsprop|differential-evolution)");
}

std::string_view to_string(OptimizeMethod m) {
  switch (m) {
    case OptimizeMethod::Gd: return "gd";
    case OptimizeMethod::RmsProp: return "rmsprop";
    case OptimizeMethod::DifferentialEvolution: return "differential-evolution";
  }
  return "gd";
}

void OptimizeSpec::validate() const {
  if (!(eta > 0.0)) throw InvalidArgument("optimize: step size must be positive");
  de.validate();
}

namespace {

OptimizeResult gradient_path(const Tensor2& x0, const models::TeacherOracle& teacher,
                             const nd::DifferentiableModel& student, const GenLossSpec& loss, const OptimizeSpec& opt,
                             std::optional<double> y_rand) {
  OptimizeResult res;
  res.method = opt.method;
  res.eta = opt.eta;
  res.y_rand = y_rand;
  nd::OptimizerSettings settings;
  settings.kind = opt.method == OptimizeMethod::Gd ? nd::OptimizerKind::VanillaGd : nd::OptimizerKind::RmsProp;
  settings.learning_rate = opt.eta;
  settings.rho = opt.rho;
  settings.eps = opt.eps;
  nd::Optimizer optimizer(settings);

  Tensor2 x = x0;
  for (std::size_t step = 0;; ++step) {
    auto lg = gen_loss_with_gradient(loss, x, teacher, student, y_rand);
    res.trace.push_back(TraceStep{x, lg.value, lg.grad});
    if (step == opt.steps) break;
    optimizer.step(x.values(), lg.grad.values());
    if (!x.all_finite()) throw NumericError("direct optimize: inputs diverged");
  }
  res.x = std::move(x);
  return res;
}

OptimizeResult evolution_path(const Tensor2& x0, const models::TeacherOracle& teacher,
                              const nd::DifferentiableModel& student, const GenLossSpec& loss, const OptimizeSpec& opt,
                              std::optional<double> y_rand, nd::Rng& rng, Sampler* init_sampler) {
  const std::size_t n = x0.rows(), d = x0.cols();
  const std::size_t pop = opt.de.population;
  const std::uint64_t batch_seed = rng.next_u64();

  std::vector<Tensor2> initial;
  std::vector<std::uint64_t> seeds;
  initial.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint64_t row_seed = nd::derive_seed(batch_seed, r);
    nd::Rng row_rng(nd::derive_seed(row_seed, 1));
    Tensor2 members(pop, d);
    std::copy(x0.row(r).begin(), x0.row(r).end(), members.row(0).begin());
    if (pop > 1) {
      Tensor2 fresh = init_sampler ? init_sampler->draw(pop - 1, row_rng) : Tensor2(pop - 1, d);
      if (!init_sampler)
        for (double& v : fresh.values()) v = row_rng.normal();
      for (std::size_t i = 1; i < pop; ++i) std::copy(fresh.row(i - 1).begin(), fresh.row(i - 1).end(), members.row(i).begin());
    }
    initial.push_back(std::move(members));
    seeds.push_back(nd::derive_seed(row_seed, 2));
  }

  auto objective = [&](const Tensor2& candidates) { return gen_loss_per_row(loss, candidates, teacher, student, y_rand); };
  Projection projection;
  if (init_sampler && init_sampler->constrained())
    projection = [init_sampler](std::span<double> row) { init_sampler->project(row); };

  const DeResult de = de_minimize(objective, initial, opt.de, seeds, projection);

  OptimizeResult res;
  res.method = OptimizeMethod::DifferentialEvolution;
  res.eta = opt.eta;
  res.y_rand = y_rand;
  // Trace: the incoming batch, then the mean per-row best after every
  // generation; only the final entry carries x.
  {
    const auto rows = gen_loss_per_row(loss, x0, teacher, student, y_rand);
    double s = 0.0;
    for (double v : rows) s += v;
    res.trace.push_back(TraceStep{x0, s / static_cast<double>(n), {}});
  }
  for (std::size_t it = 1; it < de.best_history.size(); ++it) {
    const auto& h = de.best_history[it];
    double s = 0.0;
    for (double v : h) s += v;
    res.trace.push_back(TraceStep{{}, s / static_cast<double>(n), {}});
  }
  res.trace.back().x = de.best;
  res.x = de.best;
  return res;
}

}  // namespace

OptimizeResult direct_optimize(const Tensor2& x0, const models::TeacherOracle& teacher,
                               const nd::DifferentiableModel& student, const GenLossSpec& loss,
                               const OptimizeSpec& opt, nd::Rng& rng, Sampler* init_sampler) {
  loss.validate();
  opt.validate();
  if (x0.cols() != teacher.input_dim() || x0.cols() != student.input_dim())
    throw InvalidArgument("direct optimize: batch width does not match teacher/student input dimension");
  const std::optional<double> y_rand = draw_random_target(loss.random_target, rng);
  if (opt.method == OptimizeMethod::DifferentialEvolution) {
    if (opt.de.iterations == 0) {
      OptimizeResult res;
      res.x = x0;
      res.method = opt.method;
      res.y_rand = y_rand;
      return res;
    }
    return evolution_path(x0, teacher, student, loss, opt, y_rand, rng, init_sampler);
  }
  if (!teacher.gradient_capable())
    throw CapabilityError("direct optimize: " + std::string(to_string(opt.method)) +
                          " needs teacher gradients; use differential-evolution for black-box teachers");
  if (opt.steps == 0) {
    OptimizeResult res;
    res.x = x0;
    res.method = opt.method;
    res.eta = opt.eta;
    res.y_rand = y_rand;
    auto lg = gen_loss_with_gradient(loss, x0, teacher, student, y_rand);
    res.trace.push_back(TraceStep{x0, lg.value, lg.grad});
    return res;
  }
  return gradient_path(x0, teacher, student, loss, opt, y_rand);
}

}  // namespace regraft::synth
