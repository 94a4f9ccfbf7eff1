#include "regraft/bounds/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "regraft/error.hpp"

namespace regraft::bounds {

std::string_view to_string(KConvention c) {
  switch (c) {
    case KConvention::TraceWide: return "trace-wide";
    case KConvention::InitialPoint: return "initial-point";
    case KConvention::Supplied: return "supplied";
  }
  return "supplied";
}

namespace {

double max_abs(const Tensor2& t) {
  double k = 0.0;
  for (double v : t.values()) k = std::max(k, std::abs(v));
  return k;
}

double row_norm(const Tensor2& t, std::size_t r) {
  double s = 0.0;
  for (double v : t.row(r)) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double estimate_lipschitz(const GradientFn& gradient, const Tensor2& samples) {
  if (samples.rows() == 0) throw InvalidArgument("estimate_lipschitz: need at least one sample");
  if (!gradient) throw CapabilityError("estimate_lipschitz: objective has no gradient");
  const Tensor2 g = gradient(samples);
  if (!g.same_shape(samples)) throw InvalidArgument("estimate_lipschitz: gradient shape differs from samples");
  return max_abs(g);
}

GradientFn gen_loss_gradient_fn(const synth::GenLossSpec& spec, const models::TeacherOracle& teacher,
                                const nd::DifferentiableModel& student, std::optional<double> y_rand) {
  if (!teacher.gradient_capable())
    throw CapabilityError("Lipschitz estimate needs teacher gradients (teacher is " + teacher.kind() + ")");
  return [&, spec, y_rand](const Tensor2& x) {
    // Rows don't interact, so scaling the batch-mean gradient by n gives
    // per-row gradients.
    auto lg = synth::gen_loss_with_gradient(spec, x, teacher, student, y_rand);
    Tensor2 g = std::move(lg.grad);
    for (double& v : g.values()) v *= static_cast<double>(x.rows());
    return g;
  };
}

double trace_k_hat(const synth::OptimizeResult& result) {
  double k = 0.0;
  for (const auto& s : result.trace) k = std::max(k, max_abs(s.grad));
  return k;
}

BoundReport check_displacement_bound(const synth::OptimizeResult& result, std::optional<double> k_hat,
                                     KConvention convention) {
  if (result.method != synth::OptimizeMethod::Gd)
    throw InvalidArgument("displacement bound applies to plain gradient-descent traces only (got " +
                          std::string(synth::to_string(result.method)) + ")");
  if (result.trace.empty()) throw InvalidArgument("displacement bound: empty trace");

  BoundReport rep;
  rep.check = "displacement";
  rep.t = result.trace.size() - 1;
  const Tensor2& x0 = result.trace.front().x;
  const Tensor2& xt = result.trace.back().x;
  rep.d = x0.cols();
  rep.eta = result.eta;
  if (k_hat) {
    rep.k_hat = *k_hat;
    rep.k_convention = KConvention::Supplied;
  } else {
    rep.k_convention = convention;
    rep.k_hat = convention == KConvention::InitialPoint ? max_abs(result.trace.front().grad) : trace_k_hat(result);
  }
  rep.bound = rep.eta * static_cast<double>(rep.t) * std::sqrt(static_cast<double>(rep.d)) * rep.k_hat;

  bool exact_ok = true;
  double worst_exact = 0.0;
  rep.observed = 0.0;
  for (std::size_t r = 0; r < x0.rows(); ++r) {
    double disp = 0.0;
    for (std::size_t c = 0; c < x0.cols(); ++c) disp += (xt(r, c) - x0(r, c)) * (xt(r, c) - x0(r, c));
    disp = std::sqrt(disp);
    double path = 0.0;
    for (std::size_t s = 0; s < rep.t; ++s) path += row_norm(result.trace[s].grad, r);
    path *= rep.eta;
    if (disp > path + kSlack) exact_ok = false;
    if (r == 0 || disp > rep.observed) {
      rep.observed = disp;
      worst_exact = path;
    }
  }
  rep.exact_bound = worst_exact;
  rep.exact_satisfied = exact_ok;
  rep.satisfied = rep.observed <= rep.bound + kSlack;
  rep.note = "K estimated as max per-coordinate |grad| (" + std::string(to_string(rep.k_convention)) + ")";
  return rep;
}

BoundReport check_generator_norm_bound(const Tensor2& x_g, double beta, double k_hat, std::size_t d) {
  if (!(beta > 0.0)) throw InvalidArgument("generator norm bound is undefined for beta <= 0");
  BoundReport rep;
  rep.check = "generator-norm";
  rep.d = d;
  rep.k_hat = k_hat;
  rep.k_convention = KConvention::Supplied;
  rep.bound = std::sqrt(static_cast<double>(d)) * k_hat / (2.0 * beta);
  for (std::size_t r = 0; r < x_g.rows(); ++r) rep.observed = std::max(rep.observed, row_norm(x_g, r));
  rep.satisfied = rep.observed <= rep.bound + kSlack;
  rep.advisory = true;
  rep.note = "holds at generator convergence; advisory before the generator loss plateaus";
  return rep;
}

}  // namespace regraft::bounds
