#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "regraft/ndcore/tensor.hpp"

namespace regraft::data {

using nd::Tensor2;

// Per-column affine transform v -> (v - mean) / std. Standard deviations are
// population (divide-by-n) statistics.
struct Scaler {
  std::vector<double> feature_mean;
  std::vector<double> feature_std;
  bool target_scaled = true;
  double target_mean = 0.0;
  double target_std = 1.0;
  std::string convention = "population";
};

struct Dataset {
  Tensor2 features;  // n x d
  Tensor2 targets;   // n x 1
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  std::optional<Scaler> scaler;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }
  Dataset subset(std::span<const std::size_t> rows) const;
  void validate() const;
};

// Target column given by header name or 0-based column index.
using TargetColumn = std::variant<std::string, std::size_t>;

Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target);
Dataset parse_csv(const std::string& text, const TargetColumn& target);
// Features in order, target last; 17 significant digits.
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

// Statistics over `dataset`; throws InvalidArgument naming any zero-variance column.
Scaler fit_scaler(const Dataset& dataset, bool scale_target);
Dataset apply_scaler(const Dataset& dataset, const Scaler& scaler);
// fit_scaler + apply_scaler on the same (whole) dataset.
Dataset standardize(const Dataset& dataset, bool scale_target = true);
// Undo the stored scaler. Requires dataset.scaler.
Dataset inverse_transform(const Dataset& dataset);

struct SplitSpec {
  std::size_t train_count = 5000;
  double validation_fraction = 0.10;
  std::uint64_t seed = 0;

  void validate(std::size_t n) const;
};

struct Split {
  Dataset train, validation, test;
  std::vector<std::size_t> train_rows, validation_rows, test_rows;
};

// Seeded shuffle; the first train_count rows train, floor(fraction * rest)
// validate, everything else tests.
Split split(const Dataset& dataset, const SplitSpec& spec);

struct DomainStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

DomainStats domain_stats(const Dataset& dataset);

// Standard IDX images (magic 0x00000803) and labels (magic 0x00000801).
// Pixels become [0,1] features, labels real-valued targets.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
Dataset parse_idx(const std::string& image_bytes, const std::string& label_bytes);

}  // namespace regraft::data
