#include "regraft/data/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "regraft/ndcore/rng.hpp"

namespace regraft::data {

Dataset make_friedman(std::size_t n, std::uint64_t seed, double noise) {
  nd::Rng rng(seed);
  Dataset ds;
  ds.features = Tensor2(n, 10);
  ds.targets = Tensor2(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = ds.features.row(i);
    for (double& v : x) v = rng.uniform();
    ds.targets[i] = 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
                    10.0 * x[3] + 5.0 * x[4] + noise * rng.normal();
  }
  for (std::size_t c = 0; c < 10; ++c) ds.feature_names.push_back("x" + std::to_string(c));
  ds.target_name = "y";
  return ds;
}

namespace {

// Marsaglia-Tsang; shape >= 1 assumed by the caller's concentrations.
double gamma_draw(nd::Rng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// A R N D C Q E G H I L K M F P S T W Y V
constexpr std::array<double, 20> kFrequency{8.25, 5.53, 4.06, 5.45, 1.37, 3.93, 6.75, 7.07, 2.27, 5.96,
                                            9.66, 5.84, 2.42, 3.86, 4.70, 6.56, 5.34, 1.08, 2.92, 6.87};
constexpr std::array<const char*, 20> kResidue{"A", "R", "N", "D", "C", "Q", "E", "G", "H", "I",
                                               "L", "K", "M", "F", "P", "S", "T", "W", "Y", "V"};
// +1 charged (D E K R), -1 hydrophobic (I L V F W C M), small weights elsewhere.
constexpr std::array<double, 20> kCharge{0.0, 0.8, 0.1, 1.0, 0.0, 0.1, 1.0, 0.2, 0.3, 0.0,
                                         0.0, 0.9, 0.0, 0.0, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0};
constexpr std::array<double, 20> kHydro{0.3, 0.0, 0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0, 1.0,
                                        0.9, 0.0, 0.6, 0.9, 0.0, 0.0, 0.1, 1.0, 0.4, 0.9};
constexpr double kConcentration = 60.0;

}  // namespace

Dataset make_protein_like(std::size_t n, std::uint64_t seed) {
  nd::Rng rng(seed);
  double total = 0.0;
  for (double f : kFrequency) total += f;
  std::array<double, 20> p{}, sd{};
  for (std::size_t j = 0; j < 20; ++j) {
    p[j] = kFrequency[j] / total;
    sd[j] = std::sqrt(p[j] * (1.0 - p[j]) / (kConcentration + 1.0));
  }
  Dataset ds;
  ds.features = Tensor2(n, 20);
  ds.targets = Tensor2(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = ds.features.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < 20; ++j) {
      x[j] = gamma_draw(rng, kConcentration * p[j] + 1.0);
      s += x[j];
    }
    for (double& v : x) v /= s;
    double charge = 0.0, hydro = 0.0;
    for (std::size_t j = 0; j < 20; ++j) {
      const double z = (x[j] - p[j]) / sd[j];
      charge += kCharge[j] * z;
      hydro += kHydro[j] * z;
    }
    charge /= 2.0;
    hydro /= 2.5;
    const double score = 0.9 * charge - 0.9 * hydro + 0.5 * std::tanh(charge * hydro) - 0.3 * hydro * hydro;
    const double y = 1.0 / (1.0 + std::exp(-score)) + 0.05 * rng.normal();
    ds.targets[i] = std::min(1.0, std::max(0.0, y));
  }
  for (const char* r : kResidue) ds.feature_names.emplace_back(r);
  ds.target_name = "solubility";
  return ds;
}

}  // namespace regraft::data
