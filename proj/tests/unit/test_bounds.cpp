#include <doctest.h>

#include <cmath>

#include "regraft/bounds/bounds.hpp"
#include "regraft/error.hpp"
#include "regraft/models/kernel_ridge.hpp"
#include "regraft/models/networks.hpp"

using namespace regraft;
using nd::Tensor2;

namespace {

std::shared_ptr<models::Mlp> linear(double w) {
  std::shared_ptr<models::Mlp> m = models::build_mlp({1, {}, models::Activation::Tanh, 1}, 0);
  m->parameters()[0][0] = w;
  m->parameters()[1][0] = 0.0;
  return m;
}

synth::GenLossSpec disc_only() {
  synth::GenLossSpec s;
  s.beta = 0.0;
  s.gamma = 0.0;
  s.output_penalty = synth::OutputPenalty::None;
  return s;
}

synth::OptimizeSpec plain_gd(double eta, std::size_t steps) {
  synth::OptimizeSpec o;
  o.method = synth::OptimizeMethod::Gd;
  o.eta = eta;
  o.steps = steps;
  return o;
}

// f(x) = -x^2 through teacher 2x and student x.
synth::OptimizeResult hand_trace(std::size_t steps) {
  const auto teacher = models::TeacherOracle::from_model(linear(2.0));
  nd::Rng rng(1);
  return synth::direct_optimize(Tensor2::column({1.0}), teacher, *linear(1.0), disc_only(), plain_gd(0.1, steps), rng);
}

}  // namespace

TEST_CASE("estimate_lipschitz examples") {
  const Tensor2 xs = Tensor2::column({-5, 0.3, 7});
  CHECK(bounds::estimate_lipschitz([](const Tensor2& x) { return Tensor2(x.rows(), x.cols(), 3.0); }, xs) == 3.0);
  CHECK(bounds::estimate_lipschitz([](const Tensor2& x) { return Tensor2(x.rows(), x.cols(), 0.0); }, xs) == 0.0);
  const auto square = [](const Tensor2& x) {
    Tensor2 g = x;
    for (double& v : g.values()) v *= 2.0;
    return g;
  };
  CHECK(bounds::estimate_lipschitz(square, Tensor2::column({-2, 1})) == 4.0);
  CHECK_THROWS_AS(bounds::estimate_lipschitz(square, Tensor2(0, 1)), InvalidArgument);
  CHECK_THROWS_AS(bounds::estimate_lipschitz(bounds::GradientFn{}, xs), CapabilityError);
}

TEST_CASE("gen-loss gradient function") {
  const auto teacher = models::TeacherOracle::from_model(linear(2.0));
  const auto student = linear(1.0);
  const auto g = bounds::gen_loss_gradient_fn(disc_only(), teacher, *student, std::nullopt);
  CHECK(g(Tensor2::column({1.0, -3.0})) == Tensor2::column({-2.0, 6.0}));
  CHECK(bounds::estimate_lipschitz(g, Tensor2::column({-2, 1})) == 4.0);

  const Tensor2 x = Tensor2::column({0.0, 1.0, 2.0});
  const auto krr = models::TeacherOracle::from_kernel_ridge(models::krr_fit(x, x, 1.0, 1e-3));
  CHECK_THROWS_AS(bounds::gen_loss_gradient_fn(disc_only(), krr, *linear(1.0), std::nullopt), CapabilityError);
}

TEST_CASE("displacement bound examples") {
  const auto zero = bounds::check_displacement_bound(hand_trace(0));
  CHECK(zero.t == 0);
  CHECK(zero.observed == 0.0);
  CHECK(zero.satisfied);
  CHECK(*zero.exact_satisfied);

  const auto r = bounds::check_displacement_bound(hand_trace(2));
  CHECK(r.t == 2);
  CHECK(r.d == 1);
  CHECK(r.eta == 0.1);
  CHECK(r.k_hat == doctest::Approx(2.88).epsilon(1e-14));
  CHECK(r.observed == doctest::Approx(0.44).epsilon(1e-14));
  CHECK(r.bound == doctest::Approx(0.576).epsilon(1e-14));
  CHECK(r.satisfied);
  CHECK(*r.exact_bound == doctest::Approx(0.44).epsilon(1e-14));
  CHECK(*r.exact_satisfied);
  CHECK(r.k_convention == bounds::KConvention::TraceWide);
  CHECK(r.check == "displacement");

  const auto initial = bounds::check_displacement_bound(hand_trace(2), std::nullopt, bounds::KConvention::InitialPoint);
  CHECK(initial.k_hat == 2.0);
  CHECK_FALSE(initial.satisfied);
  CHECK(initial.k_convention == bounds::KConvention::InitialPoint);
  CHECK(initial.note.find(std::string(bounds::to_string(bounds::KConvention::InitialPoint))) != std::string::npos);

  const auto supplied = bounds::check_displacement_bound(hand_trace(2), 10.0);
  CHECK(supplied.k_convention == bounds::KConvention::Supplied);
  CHECK(supplied.bound == doctest::Approx(2.0));
}

TEST_CASE("displacement check rejects non-gd traces") {
  const auto teacher = models::TeacherOracle::from_model(linear(2.0));
  nd::Rng rng(1);
  synth::OptimizeSpec o = plain_gd(0.1, 2);
  o.method = synth::OptimizeMethod::RmsProp;
  const auto r = synth::direct_optimize(Tensor2::column({1.0}), teacher, *linear(1.0), disc_only(), o, rng);
  CHECK_THROWS_AS(bounds::check_displacement_bound(r), InvalidArgument);
}

TEST_CASE("both displacement bounds hold on random gd traces") {
  nd::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.uniform_int(6);
    const auto teacher = models::TeacherOracle::from_model(models::build_mlp({d, {8}, models::Activation::Tanh, 1}, trial));
    const auto student = models::build_mlp({d, {3}, models::Activation::Softplus, 1}, 1000 + trial);
    Tensor2 x0(1 + rng.uniform_int(5), d);
    for (double& v : x0.values()) v = rng.normal();
    synth::GenLossSpec spec;
    spec.beta = 0.01;
    const auto r = bounds::check_displacement_bound(synth::direct_optimize(x0, teacher, *student, spec, plain_gd(0.1, 10), rng));
    CHECK(r.t == 10);
    CHECK(r.satisfied);
    CHECK(*r.exact_satisfied);
    CHECK(*r.exact_bound <= r.bound + bounds::kSlack);
  }
}

TEST_CASE("generator norm bound examples") {
  const Tensor2 x = Tensor2::column({1.5, -0.5});
  const auto a = bounds::check_generator_norm_bound(x, 0.25, 1.0, 1);
  CHECK(a.bound == 2.0);
  CHECK(a.observed == 1.5);
  CHECK(a.satisfied);
  CHECK(a.advisory);
  CHECK(a.check == "generator-norm");

  const auto b = bounds::check_generator_norm_bound(x, 1e3, 1.0, 1);
  CHECK(b.bound == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK_FALSE(b.satisfied);

  for (double beta : {1e-9, 0.1, 1.0, 1e6}) CHECK(bounds::check_generator_norm_bound(Tensor2(4, 3), beta, 0.0, 3).satisfied);
  CHECK_THROWS_AS(bounds::check_generator_norm_bound(x, 0.0, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(bounds::check_generator_norm_bound(x, -1.0, 1.0, 1), InvalidArgument);

  const Tensor2 row = Tensor2::from_rows({{3.0, 4.0}});
  const auto c = bounds::check_generator_norm_bound(row, 0.5, 5.0 / std::sqrt(2.0), 2);
  CHECK(c.observed == 5.0);
  CHECK(c.bound == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(c.satisfied);
}

TEST_CASE("satisfied flag agrees with observed versus bound") {
  nd::Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    Tensor2 x(1 + rng.uniform_int(4), 2);
    for (double& v : x.values()) v = rng.normal(0, 3);
    const double beta = std::exp(rng.uniform(-3, 3)), k = std::exp(rng.uniform(-3, 3));
    const auto r = bounds::check_generator_norm_bound(x, beta, k, 2);
    CHECK(r.satisfied == (r.observed <= r.bound + bounds::kSlack));
    CHECK(r.bound == doctest::Approx(std::sqrt(2.0) * k / (2 * beta)).epsilon(1e-14));
  }
}
