#pragma once

#include <cstdint>

#include "regraft/data/dataset.hpp"

namespace regraft::data {

// Friedman #1 regression surface on U[0,1]^10:
//   y = 10 sin(pi x0 x1) + 20 (x2 - 0.5)^2 + 10 x3 + 5 x4 + noise * N(0,1)
// Columns x5..x9 are inert.
Dataset make_friedman(std::size_t n, std::uint64_t seed, double noise = 1.0);

// 20 amino-acid composition features drawn from a Dirichlet around typical
// proteome frequencies (rows sum to 1) and a solubility-like target in [0,1]
// driven by charge and hydrophobicity balance.
Dataset make_protein_like(std::size_t n, std::uint64_t seed);

}  // namespace regraft::data
