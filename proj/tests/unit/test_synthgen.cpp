#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regraft/error.hpp"
#include "regraft/models/kernel_ridge.hpp"
#include "regraft/models/networks.hpp"
#include "regraft/synthgen/de.hpp"
#include "regraft/synthgen/direct.hpp"
#include "regraft/synthgen/gen_loss.hpp"
#include "regraft/synthgen/generator.hpp"
#include "regraft/synthgen/sampler.hpp"

using namespace regraft;
using nd::Tensor2;
using synth::SamplerKind;

namespace {

Tensor2 random_tensor(std::size_t r, std::size_t c, nd::Rng& rng, double scale = 1.0) {
  Tensor2 t(r, c);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

std::shared_ptr<models::Mlp> linear(double w, double b = 0.0, std::size_t d = 1) {
  std::shared_ptr<models::Mlp> m = models::build_mlp({d, {}, models::Activation::Tanh, 1}, 0);
  for (double& v : m->parameters()[0].values()) v = w;
  m->parameters()[1][0] = b;
  return m;
}

std::shared_ptr<models::Mlp> mlp(std::size_t d, std::size_t h, std::uint64_t seed,
                                 models::Activation act = models::Activation::Tanh) {
  return models::build_mlp({d, {h}, act, 1}, seed);
}

synth::GenLossSpec disc_only() {
  synth::GenLossSpec s;
  s.beta = 0.0;
  s.gamma = 0.0;
  s.output_penalty = synth::OutputPenalty::None;
  return s;
}

// Star discrepancy of a one-dimensional point set on [0,1].
double star_discrepancy(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    worst = std::max(worst, std::abs(p[i] - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n)));
  return worst + 1.0 / (2.0 * n);
}

double rastrigin(std::span<const double> x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(2.0 * M_PI * v);
  return s;
}

}  // namespace

TEST_CASE("halton examples") {
  synth::SamplerSpec spec{SamplerKind::Halton, 1, synth::SamplerSpec::uniform_box(1, 0.0, 1.0), {}, {}, false};
  CHECK(synth::sample(spec, 3, 1) == Tensor2::column({0.5, 0.25, 0.75}));
  CHECK(synth::sample(spec, 3, 99) == synth::sample(spec, 3, 1));
  CHECK(synth::radical_inverse(6, 3) == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK(synth::first_primes(5) == std::vector<std::uint32_t>{2, 3, 5, 7, 11});

  synth::Sampler s(spec);
  nd::Rng rng(1);
  CHECK(s.draw(2, rng) == Tensor2::column({0.5, 0.25}));
  CHECK(s.draw(1, rng) == Tensor2::column({0.75}));

  spec.dim = 3;
  spec.bounds = synth::Box{{-1, 0, 10}, {1, 2, 20}};
  const Tensor2 x = synth::sample(spec, 4, 1);
  CHECK(x(0, 0) == 0.0);
  CHECK(x(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(x(0, 2) == doctest::Approx(12.0));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t c = 0; c < 3; ++c) CHECK((x(i, c) >= spec.bounds->lo[c] && x(i, c) <= spec.bounds->hi[c]));
}

TEST_CASE("qmc kinds require bounds") {
  CHECK_THROWS_AS(synth::sample({SamplerKind::Halton, 2, std::nullopt, {}, {}, false}, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(synth::sample({SamplerKind::LatinHypercube, 2, std::nullopt, {}, {}, false}, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(synth::sample({SamplerKind::Gaussian, 2, std::nullopt, {}, {}, false}, 0, 1), InvalidArgument);
  synth::SamplerSpec bad{SamplerKind::Domain, 2, synth::SamplerSpec::uniform_box(2, -1, 1), {0, 0}, {1, 1}, true};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(synth::parse_sampler_kind("sobol"), InvalidArgument);
}

TEST_CASE("gaussian sampling is deterministic per seed") {
  const synth::SamplerSpec spec{SamplerKind::Gaussian, 4, std::nullopt, {}, {}, false};
  CHECK(synth::sample(spec, 50, 7) == synth::sample(spec, 50, 7));
  CHECK(synth::sample(spec, 50, 7) != synth::sample(spec, 50, 8));
  const Tensor2 big = synth::sample(spec, 20000, 3);
  double mean = 0.0, sq = 0.0;
  for (double v : big.values()) {
    mean += v;
    sq += v * v;
  }
  mean /= static_cast<double>(big.size());
  sq /= static_cast<double>(big.size());
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sq - 1.0) < 0.03);
}

TEST_CASE("latin hypercube has one point per stratum per dimension") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 37;
    const synth::SamplerSpec spec{SamplerKind::LatinHypercube, 3, synth::SamplerSpec::uniform_box(3, 0, 1), {}, {}, false};
    const Tensor2 x = synth::sample(spec, n, seed);
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<std::size_t> strata;
      for (std::size_t i = 0; i < n; ++i) strata.push_back(static_cast<std::size_t>(x(i, c) * n));
      std::sort(strata.begin(), strata.end());
      std::vector<std::size_t> expect(n);
      std::iota(expect.begin(), expect.end(), 0);
      CHECK(strata == expect);
    }
  }
}

TEST_CASE("domain sampler with simplex projection") {
  const std::size_t d = 20;
  const synth::SamplerSpec spec{SamplerKind::Domain, d, synth::SamplerSpec::uniform_box(d, 0, 1),
                                std::vector<double>(d, 0.05), std::vector<double>(d, 0.1), true};
  const Tensor2 x = synth::sample(spec, 500, 11);
  for (std::size_t i = 0; i < 500; ++i) {
    double s = 0.0;
    for (double v : x.row(i)) {
      CHECK((v >= 0.0 && v <= 1.0));
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  const synth::SamplerSpec shifted{SamplerKind::Domain, 2, std::nullopt, {5, -5}, {0, 0}, false};
  CHECK(synth::sample(shifted, 3, 1) == Tensor2::from_rows({{5, -5}, {5, -5}, {5, -5}}));
}

TEST_CASE("halton beats seeded uniform points on discrepancy") {
  const std::size_t n = 256, d = 6;
  const synth::SamplerSpec spec{SamplerKind::Halton, d, synth::SamplerSpec::uniform_box(d, 0, 1), {}, {}, false};
  const Tensor2 h = synth::sample(spec, n, 1);
  std::vector<double> hd(d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> column;
    for (std::size_t i = 0; i < n; ++i) column.push_back(h(i, c));
    hd[c] = star_discrepancy(column);
  }
  std::size_t wins = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    nd::Rng rng(seed);
    for (std::size_t c = 0; c < d; ++c) {
      std::vector<double> u(n);
      for (double& v : u) v = rng.uniform();
      wins += hd[c] < star_discrepancy(u);
      ++total;
    }
  }
  CHECK(static_cast<double>(wins) >= 0.95 * static_cast<double>(total));
}

TEST_CASE("gen_loss examples") {
  const auto teacher = models::TeacherOracle::from_model(linear(0.0, 1.0, 2));
  const auto student = linear(0.0, 0.0, 2);
  const Tensor2 x = Tensor2::from_rows({{2.0, 0.0}});
  CHECK(synth::gen_loss(disc_only(), x, teacher, *student, std::nullopt) == -1.0);

  auto with_beta = disc_only();
  with_beta.beta = 1e-5;
  CHECK(synth::gen_loss(with_beta, x, teacher, *student, std::nullopt) == doctest::Approx(-1.0 + 4e-5).epsilon(1e-15));

  synth::GenLossSpec eq9;
  eq9.epsilon = 0.0;
  eq9.beta = 0.0;
  eq9.gamma = 1.0;
  eq9.output_penalty = synth::OutputPenalty::TeacherToRandomTarget;
  eq9.random_target = synth::RandomTargetPolicy::IntegerUniform;
  const auto t32 = models::TeacherOracle::from_model(linear(0.0, 3.2, 2));
  CHECK(synth::gen_loss(eq9, x, t32, *student, 3.0) == doctest::Approx(0.04).epsilon(1e-12));

  auto logcosh = disc_only();
  logcosh.discrepancy = synth::Discrepancy::LogCosh;
  CHECK(synth::gen_loss(logcosh, x, teacher, *student, std::nullopt) ==
        doctest::Approx(-std::log(std::cosh(1.0))).epsilon(1e-14));

  auto l1 = disc_only();
  l1.epsilon = 0.0;
  l1.beta = 1.0;
  l1.input_penalty = synth::InputPenalty::L1;
  CHECK(synth::gen_loss(l1, Tensor2::from_rows({{-2.0, 0.5}, {1.0, 0.0}}), teacher, *student, std::nullopt) == 1.75);

  auto student_sq = disc_only();
  student_sq.epsilon = 0.0;
  student_sq.gamma = 2.0;
  student_sq.output_penalty = synth::OutputPenalty::StudentSquared;
  CHECK(synth::gen_loss(student_sq, x, teacher, *linear(0.0, 3.0, 2), std::nullopt) == 18.0);

  auto literal = student_sq;
  literal.penalize_input_as_output = true;
  CHECK(synth::gen_loss(literal, x, teacher, *linear(0.0, 3.0, 2), std::nullopt) == 8.0);
}

TEST_CASE("gen_loss spec validation and y_rand policies") {
  synth::GenLossSpec none;
  none.epsilon = none.beta = none.gamma = 0.0;
  CHECK_THROWS_AS(none.validate(), InvalidArgument);
  synth::GenLossSpec mismatch;
  mismatch.random_target = synth::RandomTargetPolicy::IntegerUniform;
  CHECK_THROWS_AS(mismatch.validate(), InvalidArgument);
  synth::GenLossSpec negative;
  negative.beta = -1.0;
  CHECK_THROWS_AS(negative.validate(), InvalidArgument);

  nd::Rng rng(5);
  CHECK_FALSE(synth::draw_random_target(synth::RandomTargetPolicy::None, rng));
  std::vector<int> seen(10, 0);
  for (int i = 0; i < 2000; ++i) {
    const double y = *synth::draw_random_target(synth::RandomTargetPolicy::IntegerUniform, rng);
    REQUIRE(y == std::floor(y));
    REQUIRE((y >= 0 && y <= 9));
    ++seen[static_cast<std::size_t>(y)];
    const double r = *synth::draw_random_target(synth::RandomTargetPolicy::RealUniform, rng);
    REQUIRE((r >= 0.0 && r <= 1.0));
  }
  for (int c : seen) CHECK(c > 100);
}

TEST_CASE("gen_loss gradient requires a gradient-capable teacher") {
  nd::Rng rng(2);
  const Tensor2 x = random_tensor(5, 2, rng);
  const auto krr = models::TeacherOracle::from_kernel_ridge(models::krr_fit(x, random_tensor(5, 1, rng), 1.0, 1e-3));
  const auto student = mlp(2, 4, 1);
  CHECK_NOTHROW(synth::gen_loss(synth::GenLossSpec{}, x, krr, *student, std::nullopt));
  CHECK_THROWS_AS(synth::gen_loss_with_gradient(synth::GenLossSpec{}, x, krr, *student, std::nullopt), CapabilityError);
}

TEST_CASE("gen_loss input gradient matches finite differences") {
  nd::Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + rng.uniform_int(5);
    const auto teacher = models::TeacherOracle::from_model(mlp(d, 8, 10 + trial));
    const auto student = mlp(d, 3, 100 + trial);
    synth::GenLossSpec spec;
    spec.discrepancy = trial % 2 ? synth::Discrepancy::LogCosh : synth::Discrepancy::Squared;
    spec.input_penalty = trial % 3 ? synth::InputPenalty::L2Squared : synth::InputPenalty::L1;
    spec.beta = 0.1;
    spec.gamma = 0.3;
    std::optional<double> y_rand;
    if (trial % 4 == 0) {
      spec.output_penalty = synth::OutputPenalty::TeacherToRandomTarget;
      spec.random_target = synth::RandomTargetPolicy::RealUniform;
      y_rand = 0.4;
    }
    Tensor2 x = random_tensor(4, d, rng);
    const auto g = synth::gen_loss_with_gradient(spec, x, teacher, *student, y_rand);
    CHECK(g.value == synth::gen_loss(spec, x, teacher, *student, y_rand));
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double keep = x[i];
      x[i] = keep + h;
      const double up = synth::gen_loss(spec, x, teacher, *student, y_rand);
      x[i] = keep - h;
      const double down = synth::gen_loss(spec, x, teacher, *student, y_rand);
      x[i] = keep;
      const double fd = (up - down) / (2 * h);
      CHECK(std::abs(fd - g.grad[i]) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("direct_optimize examples") {
  const auto teacher = models::TeacherOracle::from_model(linear(2.0));
  const auto student = linear(1.0);
  const Tensor2 x0 = Tensor2::column({1.0});
  synth::OptimizeSpec gd;
  gd.method = synth::OptimizeMethod::Gd;
  gd.eta = 0.1;
  gd.steps = 2;
  nd::Rng rng(1);
  const auto r = synth::direct_optimize(x0, teacher, *student, disc_only(), gd, rng);
  REQUIRE(r.trace.size() == 3);
  CHECK(r.trace[0].x[0] == 1.0);
  CHECK(std::abs(r.trace[1].x[0] - 1.2) <= 1e-12);
  CHECK(std::abs(r.trace[2].x[0] - 1.44) <= 1e-12);
  CHECK(r.x == r.trace[2].x);
  CHECK(r.trace[0].loss == -1.0);
  CHECK(r.trace[0].grad[0] == -2.0);

  gd.steps = 0;
  for (auto method : {synth::OptimizeMethod::Gd, synth::OptimizeMethod::RmsProp}) {
    gd.method = method;
    const Tensor2 wild = Tensor2::from_rows({{0.1234567891234}, {-1e-300}});
    CHECK(synth::direct_optimize(wild, teacher, *student, disc_only(), gd, rng).x == wild);
  }

  synth::GenLossSpec penalty = disc_only();
  penalty.beta = 1.0;
  gd.method = synth::OptimizeMethod::Gd;
  gd.steps = 1;
  const auto same = models::TeacherOracle::from_model(linear(0.7, 0.3));
  const auto p = synth::direct_optimize(x0, same, *linear(0.7, 0.3), penalty, gd, rng);
  CHECK(std::abs(p.x[0] - 0.8) <= 1e-15);

  synth::OptimizeSpec de;
  de.method = synth::OptimizeMethod::DifferentialEvolution;
  de.de.iterations = 0;
  CHECK(synth::direct_optimize(x0, teacher, *student, disc_only(), de, rng).x == x0);
}

TEST_CASE("rmsprop direct optimization follows the update rule") {
  const auto teacher = models::TeacherOracle::from_model(linear(2.0));
  const auto student = linear(1.0);
  synth::OptimizeSpec o;
  o.method = synth::OptimizeMethod::RmsProp;
  o.eta = 0.1;
  o.steps = 2;
  nd::Rng rng(1);
  const auto r = synth::direct_optimize(Tensor2::column({1.0}), teacher, *student, disc_only(), o, rng);
  double x = 1.0, v = 0.0;
  for (int s = 0; s < 2; ++s) {
    const double g = -2.0 * x;
    v = 0.99 * v + 0.01 * g * g;
    x -= 0.1 * g / std::sqrt(v + 1e-8);
  }
  CHECK(std::abs(r.x[0] - x) <= 1e-12);
}

TEST_CASE("gradient methods reject a black-box teacher") {
  nd::Rng rng(4);
  const Tensor2 x = random_tensor(6, 2, rng);
  const auto krr = models::TeacherOracle::from_kernel_ridge(models::krr_fit(x, random_tensor(6, 1, rng), 1.0, 1e-3));
  synth::OptimizeSpec o;
  o.method = synth::OptimizeMethod::Gd;
  CHECK_THROWS_AS(synth::direct_optimize(x, krr, *mlp(2, 3, 1), disc_only(), o, rng), CapabilityError);
  o.method = synth::OptimizeMethod::DifferentialEvolution;
  o.de.iterations = 3;
  CHECK_NOTHROW(synth::direct_optimize(x, krr, *mlp(2, 3, 1), disc_only(), o, rng));
}

TEST_CASE("optimize spec validation") {
  synth::OptimizeSpec o;
  o.de.F = 2.5;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o.de.F = 2.0;
  o.de.CR = 1.1;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o.de.CR = 0.0;
  o.eta = 0.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  CHECK(synth::parse_optimize_method("de") == synth::OptimizeMethod::DifferentialEvolution);
}

TEST_CASE("DE with F=0 and CR=1 never moves off the best member") {
  const auto objective = [](const Tensor2& x) {
    std::vector<double> out;
    for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(rastrigin(x.row(i)));
    return out;
  };
  nd::Rng rng(6);
  std::vector<Tensor2> init{random_tensor(10, 3, rng, 2.0), random_tensor(10, 3, rng, 2.0)};
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto r = synth::de_minimize(objective, init, {10, 0.0, 1.0, 15}, seeds);
  for (std::size_t k = 0; k < 2; ++k) {
    double best = 1e300;
    for (std::size_t i = 0; i < 10; ++i) best = std::min(best, rastrigin(init[k].row(i)));
    for (const auto& h : r.best_history) CHECK(h[k] == best);
  }
}

TEST_CASE("DE is elitist and improves on a multimodal objective") {
  std::size_t calls = 0;
  const auto objective = [&](const Tensor2& x) {
    ++calls;
    std::vector<double> out;
    for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(rastrigin(x.row(i)));
    return out;
  };
  std::size_t improved = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    nd::Rng rng(seed);
    std::vector<Tensor2> init{random_tensor(15, 4, rng, 3.0), random_tensor(15, 4, rng, 3.0), random_tensor(15, 4, rng, 3.0)};
    const std::vector<std::uint64_t> seeds{seed, seed + 100, seed + 200};
    calls = 0;
    const auto r = synth::de_minimize(objective, init, {}, seeds);
    CHECK(calls == 26);
    REQUIRE(r.best_history.size() == 26);
    for (std::size_t it = 1; it < r.best_history.size(); ++it)
      for (std::size_t k = 0; k < 3; ++k) CHECK(r.best_history[it][k] <= r.best_history[it - 1][k]);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(r.best_value[k] == rastrigin(r.best.row(k)));
      improved += r.best_value[k] < r.best_history[0][k];
    }
    const std::vector<Tensor2> swapped{init[2], init[0], init[1]};
    const std::vector<std::uint64_t> swapped_seeds{seeds[2], seeds[0], seeds[1]};
    const auto s = synth::de_minimize(objective, swapped, {}, swapped_seeds);
    CHECK(s.best_value[0] == r.best_value[2]);
    CHECK(s.best_value[1] == r.best_value[0]);
  }
  CHECK(improved >= 48);
}

TEST_CASE("DE direct optimization against a kernel ridge teacher") {
  nd::Rng rng(7);
  const std::size_t d = 5;
  const synth::SamplerSpec spec{SamplerKind::Domain, d, synth::SamplerSpec::uniform_box(d, 0, 1),
                                std::vector<double>(d, 0.2), std::vector<double>(d, 0.1), true};
  const Tensor2 train_x = synth::sample(spec, 40, 1);
  const auto teacher =
      models::TeacherOracle::from_kernel_ridge(models::krr_fit(train_x, random_tensor(40, 1, rng), 0.5, 1e-3));
  const auto student = mlp(d, 4, 2);
  synth::GenLossSpec loss;
  loss.epsilon = 0.05;
  loss.output_penalty = synth::OutputPenalty::TeacherToRandomTarget;
  loss.random_target = synth::RandomTargetPolicy::RealUniform;
  loss.gamma = 1.0;
  synth::OptimizeSpec o;
  o.method = synth::OptimizeMethod::DifferentialEvolution;
  synth::Sampler sampler(spec);
  const Tensor2 x0 = synth::sample(spec, 8, 2);
  nd::Rng a(3), b(3);
  const auto r = synth::direct_optimize(x0, teacher, *student, loss, o, a, &sampler);
  synth::Sampler sampler2(spec);
  const auto r2 = synth::direct_optimize(x0, teacher, *student, loss, o, b, &sampler2);
  CHECK(r.x == r2.x);
  REQUIRE(r.y_rand);
  REQUIRE(r.trace.size() == 26);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].loss <= r.trace[i - 1].loss);
  CHECK(r.trace.back().loss < r.trace.front().loss);
  CHECK(r.trace.back().loss == doctest::Approx(synth::gen_loss(loss, r.x, teacher, *student, r.y_rand)).epsilon(1e-12));
  for (std::size_t i = 0; i < r.x.rows(); ++i) {
    double s = 0.0;
    for (double v : r.x.row(i)) {
      CHECK((v >= 0.0 && v <= 1.0));
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("generator round with learning rate 0 leaves parameters alone") {
  const auto teacher = models::TeacherOracle::from_model(mlp(3, 6, 1));
  const auto student = mlp(3, 2, 2);
  auto g = models::build_generator({4, {8}, 3, models::Activation::Relu}, 3);
  const auto before = g->flat_parameters();
  synth::GeneratorTrainer trainer(std::move(g), {nd::OptimizerKind::RmsProp, 0.0, 0.99, 1e-8, 0.0});
  nd::Rng a(9), b(9);
  const auto r1 = trainer.round(teacher, *student, synth::GenLossSpec{}, 5, a);
  CHECK(trainer.generator().flat_parameters() == before);
  const auto r2 = trainer.round(teacher, *student, synth::GenLossSpec{}, 5, b);
  CHECK(r1.x_g == r2.x_g);
  CHECK(r1.z == r2.z);
  CHECK(r1.x_g == trainer.generator().predict(r1.z));
}

TEST_CASE("generator loss gradient matches finite differences") {
  nd::Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const auto teacher = models::TeacherOracle::from_model(mlp(2, 5, 20 + trial));
    const auto student = mlp(2, 3, 30 + trial);
    auto g = models::build_generator({3, {4}, 2, models::Activation::Tanh}, 40 + trial);
    const Tensor2 z = random_tensor(6, 3, rng);
    synth::GenLossSpec spec;
    spec.discrepancy = trial % 2 ? synth::Discrepancy::LogCosh : synth::Discrepancy::Squared;
    spec.beta = 0.05;
    spec.gamma = 0.05;
    const auto grad = synth::generator_loss_gradient(*g, z, teacher, *student, spec, std::nullopt);
    auto flat = g->flat_parameters();
    std::vector<double> analytic;
    for (const auto& t : grad.grads) analytic.insert(analytic.end(), t.values().begin(), t.values().end());
    REQUIRE(analytic.size() == flat.size());
    const double h = 1e-6;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double keep = flat[i];
      flat[i] = keep + h;
      g->set_flat_parameters(flat);
      const double up = synth::gen_loss(spec, g->predict(z), teacher, *student, std::nullopt);
      flat[i] = keep - h;
      g->set_flat_parameters(flat);
      const double down = synth::gen_loss(spec, g->predict(z), teacher, *student, std::nullopt);
      flat[i] = keep;
      const double fd = (up - down) / (2 * h);
      CHECK(std::abs(fd - analytic[i]) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
    g->set_flat_parameters(flat);
  }
  nd::Rng r2(1);
  const Tensor2 x = random_tensor(5, 2, r2);
  const auto krr = models::TeacherOracle::from_kernel_ridge(models::krr_fit(x, random_tensor(5, 1, r2), 1.0, 1e-3));
  auto g = models::build_generator({3, {4}, 2, models::Activation::Tanh}, 1);
  CHECK_THROWS_AS(synth::generator_loss_gradient(*g, random_tensor(2, 3, r2), krr, *mlp(2, 3, 1), synth::GenLossSpec{},
                                                 std::nullopt),
                  CapabilityError);
}

TEST_CASE("trained generator finds harder inputs than gaussian noise") {
  const std::size_t d = 3;
  const auto teacher = models::TeacherOracle::from_model(mlp(d, 20, 1));
  const auto student = mlp(d, 2, 2);
  synth::GenLossSpec spec;
  synth::GeneratorTrainer trainer(models::build_generator({4, {16}, d, models::Activation::Relu}, 3),
                                  {nd::OptimizerKind::RmsProp, 1e-2, 0.99, 1e-8, 0.0});
  nd::Rng rng(4);
  for (int i = 0; i < 200; ++i) trainer.round(teacher, *student, spec, 32, rng);
  const auto student_loss = [&](const Tensor2& x) {
    const Tensor2 t = teacher.predict(x), s = student->predict(x);
    double sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) sum += (t[i] - s[i]) * (t[i] - s[i]);
    return sum / static_cast<double>(t.size());
  };
  const double gen = student_loss(trainer.emit(500, rng));
  const double gauss = student_loss(random_tensor(500, d, rng));
  CHECK(gen > gauss);
}

TEST_CASE("generator rounds are reproducible and reemit toggles the batch") {
  const auto teacher = models::TeacherOracle::from_model(mlp(2, 6, 1));
  const auto student = mlp(2, 2, 2);
  const auto trainer = [] {
    return synth::GeneratorTrainer(models::build_generator({3, {5}, 2, models::Activation::Relu}, 3),
                                   {nd::OptimizerKind::RmsProp, 1e-2, 0.99, 1e-8, 0.0});
  };
  auto a = trainer(), b = trainer(), c = trainer();
  nd::Rng ra(1), rb(1), rc(1);
  for (int i = 0; i < 5; ++i) {
    const auto x = a.round(teacher, *student, synth::GenLossSpec{}, 4, ra);
    const auto y = b.round(teacher, *student, synth::GenLossSpec{}, 4, rb);
    const auto pre = c.round(teacher, *student, synth::GenLossSpec{}, 4, rc, false);
    CHECK(x.x_g == y.x_g);
    CHECK(x.z == pre.z);
    CHECK(x.x_g != pre.x_g);
    CHECK(x.x_g == a.generator().predict(x.z));
  }
  CHECK(a.generator().flat_parameters() == c.generator().flat_parameters());
}
