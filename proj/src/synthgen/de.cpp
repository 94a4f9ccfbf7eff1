#include "regraft/synthgen/de.hpp"

#include <array>
#include <string>

#include "regraft/error.hpp"
#include "regraft/ndcore/rng.hpp"

namespace regraft::synth {

void DeSettings::validate() const {
  if (population < 5) throw InvalidArgument("differential evolution: best/2/bin needs a population of at least 5");
  if (!(F >= 0.0 && F <= 2.0)) throw InvalidArgument("differential evolution: F must lie in [0,2]");
  if (!(CR >= 0.0 && CR <= 1.0)) throw InvalidArgument("differential evolution: CR must lie in [0,1]");
}

namespace {

std::size_t argmin(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

}  // namespace

DeResult de_minimize(const BatchObjective& objective, std::span<const Tensor2> initial, const DeSettings& settings,
                     std::span<const std::uint64_t> seeds, const Projection& project) {
  settings.validate();
  const std::size_t groups = initial.size();
  if (groups == 0) throw InvalidArgument("differential evolution: no sub-populations");
  if (seeds.size() != groups) throw InvalidArgument("differential evolution: one seed per sub-population required");
  const std::size_t pop = settings.population;
  const std::size_t d = initial.front().cols();
  for (const auto& p : initial) {
    if (p.rows() != pop || p.cols() != d)
      throw InvalidArgument("differential evolution: initial populations must be " + std::to_string(pop) + "x" +
                            std::to_string(d));
  }

  // All sub-populations stacked: row g * pop + i.
  Tensor2 members = nd::vstack(initial);
  if (project)
    for (std::size_t r = 0; r < members.rows(); ++r) project(members.row(r));
  std::vector<double> fitness = objective(members);
  if (fitness.size() != members.rows()) throw InvalidArgument("differential evolution: objective returned wrong count");

  std::vector<nd::Rng> rngs;
  rngs.reserve(groups);
  for (auto s : seeds) rngs.emplace_back(s);

  DeResult result;
  auto record_best = [&] {
    std::vector<double> row(groups);
    for (std::size_t g = 0; g < groups; ++g)
      row[g] = fitness[g * pop + argmin(std::span<const double>(fitness).subspan(g * pop, pop))];
    result.best_history.push_back(std::move(row));
  };
  record_best();

  Tensor2 trials(members.rows(), d);
  for (std::size_t it = 0; it < settings.iterations; ++it) {
    for (std::size_t g = 0; g < groups; ++g) {
      nd::Rng& rng = rngs[g];
      const std::size_t base = g * pop;
      const std::size_t best = base + argmin(std::span<const double>(fitness).subspan(base, pop));
      for (std::size_t i = 0; i < pop; ++i) {
        std::array<std::size_t, 4> r{};
        for (std::size_t k = 0; k < 4; ++k) {
          std::size_t c;
          bool clash;
          do {
            c = rng.uniform_int(pop);
            clash = c == i;
            for (std::size_t q = 0; q < k; ++q) clash = clash || r[q] == c;
          } while (clash);
          r[k] = c;
        }
        const auto target = members.row(base + i);
        const auto b = members.row(best);
        const auto x1 = members.row(base + r[0]);
        const auto x2 = members.row(base + r[1]);
        const auto x3 = members.row(base + r[2]);
        const auto x4 = members.row(base + r[3]);
        auto trial = trials.row(base + i);
        const std::size_t jrand = rng.uniform_int(d);
        for (std::size_t j = 0; j < d; ++j) {
          const bool cross = rng.uniform() < settings.CR || j == jrand;
          trial[j] = cross ? b[j] + settings.F * (x1[j] - x2[j]) + settings.F * (x3[j] - x4[j]) : target[j];
        }
        if (project) project(trial);
      }
    }
    const std::vector<double> trial_fit = objective(trials);
    if (trial_fit.size() != trials.rows()) throw InvalidArgument("differential evolution: objective returned wrong count");
    for (std::size_t r = 0; r < trials.rows(); ++r) {
      if (trial_fit[r] <= fitness[r]) {
        std::copy(trials.row(r).begin(), trials.row(r).end(), members.row(r).begin());
        fitness[r] = trial_fit[r];
      }
    }
    record_best();
  }

  result.best = Tensor2(groups, d);
  result.best_value.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t b = g * pop + argmin(std::span<const double>(fitness).subspan(g * pop, pop));
    std::copy(members.row(b).begin(), members.row(b).end(), result.best.row(g).begin());
    result.best_value[g] = fitness[b];
  }
  return result;
}

}  // namespace regraft::synth
