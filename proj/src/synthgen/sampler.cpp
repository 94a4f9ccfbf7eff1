#include "regraft/synthgen/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "regraft/error.hpp"

namespace regraft::synth {

SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "gaussian") return SamplerKind::Gaussian;
  if (name == "latin-hypercube" || name == "lhs") return SamplerKind::LatinHypercube;
  if (name == "halton") return SamplerKind::Halton;
  if (name == "domain") return SamplerKind::Domain;
  throw InvalidArgument("unknown sampler '" + std::string(name) + "' (expected gaussian|latin-hypercube|halton|domain)");
}

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Gaussian: return "gaussian";
    case SamplerKind::LatinHypercube: return "latin-hypercube";
    case SamplerKind::Halton: return "halton";
    case SamplerKind::Domain: return "domain";
  }
  return "gaussian";
}

Box SamplerSpec::uniform_box(std::size_t dim, double lo, double hi) {
  return Box{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

void SamplerSpec::validate() const {
  if (dim < 1) throw InvalidArgument("sampler: dimension must be >= 1");
  if (bounds) {
    if (bounds->lo.size() != dim || bounds->hi.size() != dim)
      throw InvalidArgument("sampler: bounds must have one entry per dimension");
    for (std::size_t i = 0; i < dim; ++i) {
      if (!std::isfinite(bounds->lo[i]) || !std::isfinite(bounds->hi[i]) || !(bounds->lo[i] <= bounds->hi[i]))
        throw InvalidArgument("sampler: bounds must be finite with lo <= hi");
    }
  }
  if ((kind == SamplerKind::Halton || kind == SamplerKind::LatinHypercube) && !bounds) {
    throw InvalidArgument("sampler: " + std::string(to_string(kind)) + " requires finite box bounds");
  }
  if (kind == SamplerKind::Domain) {
    if (mean.size() != dim || stddev.size() != dim)
      throw InvalidArgument("sampler: domain sampler needs per-feature mean and stddev");
    for (double s : stddev)
      if (!(s >= 0.0)) throw InvalidArgument("sampler: domain stddev must be >= 0");
  }
  if (simplex) {
    if (kind != SamplerKind::Domain) throw InvalidArgument("sampler: simplex renormalization applies to domain sampling");
    if (!bounds) throw InvalidArgument("sampler: simplex renormalization requires clip bounds [0,1]");
    for (std::size_t i = 0; i < dim; ++i)
      if (bounds->lo[i] != 0.0 || bounds->hi[i] != 1.0)
        throw InvalidArgument("sampler: simplex renormalization requires clip bounds [0,1]");
  }
}

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  double inv_base = 1.0 / base;
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * factor;
    index /= base;
    factor *= inv_base;
  }
  return result;
}

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  for (std::uint32_t c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

Sampler::Sampler(SamplerSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

bool Sampler::constrained() const noexcept { return spec_.bounds.has_value() && spec_.kind == SamplerKind::Domain; }

void Sampler::project(std::span<double> row) const {
  if (!constrained()) return;
  const Box& b = *spec_.bounds;
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::clamp(row[j], b.lo[j], b.hi[j]);
  if (spec_.simplex) {
    double s = 0.0;
    for (double v : row) s += v;
    if (s > 0.0) {
      for (double& v : row) v /= s;
    } else {
      for (double& v : row) v = 1.0 / static_cast<double>(row.size());
    }
  }
}

void Sampler::project(Tensor2& batch) const {
  for (std::size_t r = 0; r < batch.rows(); ++r) project(batch.row(r));
}

Tensor2 Sampler::draw(std::size_t n, nd::Rng& rng) {
  if (n < 1) throw InvalidArgument("sampler: n must be >= 1");
  const std::size_t d = spec_.dim;
  Tensor2 out(n, d);
  switch (spec_.kind) {
    case SamplerKind::Gaussian:
      for (double& v : out.values()) v = rng.normal();
      break;
    case SamplerKind::Halton: {
      const auto primes = first_primes(d);
      const Box& b = *spec_.bounds;
      for (std::size_t i = 0; i < n; ++i, ++halton_index_)
        for (std::size_t j = 0; j < d; ++j)
          out(i, j) = b.lo[j] + (b.hi[j] - b.lo[j]) * radical_inverse(halton_index_, primes[j]);
      break;
    }
    case SamplerKind::LatinHypercube: {
      const Box& b = *spec_.bounds;
      std::vector<std::size_t> perm(n);
      for (std::size_t j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
        for (std::size_t i = 0; i < n; ++i) {
          const double u = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
          out(i, j) = b.lo[j] + (b.hi[j] - b.lo[j]) * u;
        }
      }
      break;
    }
    case SamplerKind::Domain:
      for (std::size_t i = 0; i < n; ++i) {
        auto row = out.row(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = rng.normal(spec_.mean[j], spec_.stddev[j]);
        project(row);
      }
      break;
  }
  return out;
}

Tensor2 sample(const SamplerSpec& spec, std::size_t n, std::uint64_t seed) {
  Sampler s(spec);
  nd::Rng rng(seed);
  return s.draw(n, rng);
}

}  // namespace regraft::synth
