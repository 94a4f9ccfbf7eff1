#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "regraft/ndcore/model.hpp"

namespace regraft::models {

using nd::DifferentiableModel;
using nd::Tensor2;
using nd::Var;

enum class Activation { Tanh, Relu, Softplus };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

// Regression MLP: input_dim -> hidden... -> 1, linear output.
struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden;
  Activation activation = Activation::Tanh;
  std::size_t output_dim = 1;

  void validate() const;
};

// latent -> hidden (relu) -> output_dim, linear output.
struct GeneratorSpec {
  std::size_t latent_dim = 10;
  std::vector<std::size_t> hidden{128};
  std::size_t output_dim = 1;
  Activation activation = Activation::Relu;

  void validate() const;
};

// Gaussian RBF layer followed by a linear output unit. Widths are stored as
// log-widths so they stay positive under unconstrained updates.
struct RbfStudentSpec {
  std::size_t input_dim = 1;
  std::size_t centers = 100;
  double initial_width = 1.0;

  void validate() const;
};

// Fully connected network; parameters are [W0, b0, W1, b1, ...] with W of shape
// fan_in x fan_out and b of shape 1 x fan_out.
class Mlp final : public DifferentiableModel {
 public:
  Mlp(std::string kind, std::vector<std::size_t> layer_sizes, Activation activation);

  std::string_view kind() const override { return kind_; }
  std::size_t input_dim() const override { return sizes_.front(); }
  std::size_t output_dim() const override { return sizes_.back(); }
  std::unique_ptr<DifferentiableModel> clone() const override { return std::make_unique<Mlp>(*this); }
  Var forward(Var batch, std::span<const Var> params) const override;

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  Activation activation() const noexcept { return activation_; }

  // Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
  void initialize(std::uint64_t seed);

 private:
  std::string kind_;
  std::vector<std::size_t> sizes_;
  Activation activation_;
};

// Parameters are [centers k x d, log_widths 1 x k, weights k x 1, bias 1 x 1].
// Hidden unit j emits exp(-|x - c_j|^2 / (2 sigma_j^2)).
class RbfNet final : public DifferentiableModel {
 public:
  RbfNet(std::size_t input_dim, std::size_t centers);

  std::string_view kind() const override { return "rbf"; }
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t output_dim() const override { return 1; }
  std::unique_ptr<DifferentiableModel> clone() const override { return std::make_unique<RbfNet>(*this); }
  Var forward(Var batch, std::span<const Var> params) const override;

  std::size_t center_count() const noexcept { return centers_; }

  // Hidden activations only (n x k).
  Tensor2 hidden_activations(const Tensor2& batch) const;

 private:
  Var hidden(Var batch, std::span<const Var> params) const;

  std::size_t input_dim_;
  std::size_t centers_;
};

std::unique_ptr<Mlp> build_mlp(const MlpSpec& spec, std::uint64_t seed);
std::unique_ptr<Mlp> build_generator(const GeneratorSpec& spec, std::uint64_t seed);
// `centers` (k x d) seeds the RBF centers; log-widths start at log(initial_width), output weights
// use the same uniform fan scheme as the MLP.
std::unique_ptr<RbfNet> build_rbf(const RbfStudentSpec& spec, const Tensor2& centers, std::uint64_t seed);

// Sum over layers of (fan_in + 1) * fan_out.
std::size_t mlp_parameter_count(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                                std::size_t output_dim);

}  // namespace regraft::models
