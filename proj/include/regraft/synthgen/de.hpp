#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "regraft/ndcore/tensor.hpp"

namespace regraft::synth {

using nd::Tensor2;

struct DeSettings {
  std::size_t population = 15;
  double F = 0.8;
  double CR = 0.9;
  std::size_t iterations = 25;

  void validate() const;
};

// Objective over a batch of candidates (one per row), returning one value per row.
using BatchObjective = std::function<std::vector<double>(const Tensor2&)>;
// Maps a candidate back into the feasible set, in place.
using Projection = std::function<void(std::span<double>)>;

struct DeResult {
  Tensor2 best;                                  // one row per sub-population
  std::vector<double> best_value;                // per sub-population
  std::vector<std::vector<double>> best_history; // [iteration 0..iters][sub-population]
};

// best/2/bin differential evolution over independent sub-populations of equal
// size. `initial[k]` is the starting population of sub-population k
// (population x d); all trial vectors of a generation are scored in a single
// objective call and selection is greedy (trial replaces target when not
// worse). Each sub-population draws from its own generator seeded by
// `seeds[k]`, so results do not depend on evaluation order.
DeResult de_minimize(const BatchObjective& objective, std::span<const Tensor2> initial, const DeSettings& settings,
                     std::span<const std::uint64_t> seeds, const Projection& project = {});

}  // namespace regraft::synth
