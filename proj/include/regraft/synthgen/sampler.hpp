#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "regraft/ndcore/rng.hpp"
#include "regraft/ndcore/tensor.hpp"

namespace regraft::synth {

using nd::Tensor2;

enum class SamplerKind { Gaussian, LatinHypercube, Halton, Domain };

SamplerKind parse_sampler_kind(std::string_view name);
std::string_view to_string(SamplerKind kind);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::Gaussian;
  std::size_t dim = 1;
  // Required for halton / latin-hypercube; clip range for domain.
  std::optional<Box> bounds;
  // Domain only: per-feature normal parameters.
  std::vector<double> mean;
  std::vector<double> stddev;
  // Domain only: rescale each row to sum to 1 after clipping. Needs bounds [0,1].
  bool simplex = false;

  void validate() const;

  static Box uniform_box(std::size_t dim, double lo, double hi);
};

// Stateful sampler. Halton continues along the sequence across draws; the
// other kinds are driven entirely by the Rng passed in.
class Sampler {
 public:
  explicit Sampler(SamplerSpec spec);

  Tensor2 draw(std::size_t n, nd::Rng& rng);

  // Clip to bounds then simplex-renormalize, as configured. Identity for
  // unconstrained samplers.
  void project(std::span<double> row) const;
  void project(Tensor2& batch) const;
  bool constrained() const noexcept;

  const SamplerSpec& spec() const noexcept { return spec_; }

 private:
  SamplerSpec spec_;
  std::uint64_t halton_index_ = 1;
};

// First draw of a fresh sampler: for halton, points 1..n of the sequence.
Tensor2 sample(const SamplerSpec& spec, std::size_t n, std::uint64_t seed);

// Van der Corput radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, std::uint32_t base);
std::vector<std::uint32_t> first_primes(std::size_t count);

}  // namespace regraft::synth
