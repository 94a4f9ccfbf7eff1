#include "regraft/models/networks.hpp"

#include <cmath>

#include "regraft/error.hpp"
#include "regraft/ndcore/ops.hpp"
#include "regraft/ndcore/rng.hpp"

namespace regraft::models {

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "softplus") return Activation::Softplus;
  throw InvalidArgument("unknown activation '" + std::string(name) + "' (expected tanh|relu|softplus)");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Softplus: return "softplus";
  }
  return "tanh";
}

void MlpSpec::validate() const {
  if (input_dim < 1) throw InvalidArgument("MlpSpec: input dimension must be >= 1");
  for (auto h : hidden)
    if (h < 1) throw InvalidArgument("MlpSpec: hidden layer sizes must be >= 1");
  if (output_dim != 1) throw InvalidArgument("MlpSpec: output dimension must be 1");
}

void GeneratorSpec::validate() const {
  if (latent_dim < 1) throw InvalidArgument("GeneratorSpec: latent dimension must be >= 1");
  if (output_dim < 1) throw InvalidArgument("GeneratorSpec: output dimension must be >= 1");
  for (auto h : hidden)
    if (h < 1) throw InvalidArgument("GeneratorSpec: hidden layer sizes must be >= 1");
}

void RbfStudentSpec::validate() const {
  if (input_dim < 1) throw InvalidArgument("RbfStudentSpec: input dimension must be >= 1");
  if (centers < 1) throw InvalidArgument("RbfStudentSpec: center count must be >= 1");
  if (!(initial_width > 0.0) || !std::isfinite(initial_width))
    throw InvalidArgument("RbfStudentSpec: initial width must be positive and finite");
}

std::size_t mlp_parameter_count(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                                std::size_t output_dim) {
  std::size_t total = 0;
  std::size_t fan_in = input_dim;
  for (auto h : hidden) {
    total += (fan_in + 1) * h;
    fan_in = h;
  }
  return total + (fan_in + 1) * output_dim;
}

namespace {

void glorot_fill(Tensor2& w, nd::Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.values()) v = rng.uniform(-a, a);
}

Var activate(Var h, Activation a) {
  switch (a) {
    case Activation::Tanh: return nd::tanh(h);
    case Activation::Relu: return nd::relu(h);
    case Activation::Softplus: return nd::softplus(h);
  }
  return h;
}

}  // namespace

Mlp::Mlp(std::string kind, std::vector<std::size_t> layer_sizes, Activation activation)
    : kind_(std::move(kind)), sizes_(std::move(layer_sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw InvalidArgument("Mlp: need at least input and output sizes");
  for (auto s : sizes_)
    if (s < 1) throw InvalidArgument("Mlp: layer sizes must be >= 1");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    params_.emplace_back(sizes_[l], sizes_[l + 1]);
    params_.emplace_back(1, sizes_[l + 1]);
  }
}

void Mlp::initialize(std::uint64_t seed) {
  nd::Rng rng(seed);
  for (std::size_t l = 0; l < params_.size(); l += 2) {
    glorot_fill(params_[l], rng);
    params_[l + 1].fill(0.0);
  }
}

Var Mlp::forward(Var batch, std::span<const Var> params) const {
  if (params.size() != params_.size()) throw InvalidArgument("Mlp::forward: parameter handle count mismatch");
  Var h = batch;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    h = nd::add_bias(nd::matmul(h, params[2 * l]), params[2 * l + 1]);
    if (l + 1 < layers) h = activate(h, activation_);
  }
  return h;
}

RbfNet::RbfNet(std::size_t input_dim, std::size_t centers) : input_dim_(input_dim), centers_(centers) {
  if (input_dim < 1 || centers < 1) throw InvalidArgument("RbfNet: dimensions must be >= 1");
  params_.emplace_back(centers, input_dim);
  params_.emplace_back(1, centers);
  params_.emplace_back(centers, 1);
  params_.emplace_back(1, 1);
}

Var RbfNet::hidden(Var batch, std::span<const Var> params) const {
  if (params.size() != 4) throw InvalidArgument("RbfNet::forward: parameter handle count mismatch");
  Var dist = nd::sq_dist(batch, params[0]);
  // -1 / (2 sigma^2) = -0.5 * exp(-2 log sigma)
  Var coef = nd::scale(nd::exp(nd::scale(params[1], -2.0)), -0.5);
  return nd::exp(nd::mul_row(dist, coef));
}

Var RbfNet::forward(Var batch, std::span<const Var> params) const {
  return nd::add_bias(nd::matmul(hidden(batch, params), params[2]), params[3]);
}

Tensor2 RbfNet::hidden_activations(const Tensor2& batch) const {
  check_input(batch);
  nd::Tape tape;
  Var x = tape.constant(batch);
  const auto vars = bind(tape, false);
  return hidden(x, vars).value();
}

std::unique_ptr<Mlp> build_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<std::size_t> sizes{spec.input_dim};
  sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
  sizes.push_back(spec.output_dim);
  auto m = std::make_unique<Mlp>("mlp", std::move(sizes), spec.activation);
  m->initialize(seed);
  return m;
}

std::unique_ptr<Mlp> build_generator(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<std::size_t> sizes{spec.latent_dim};
  sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
  sizes.push_back(spec.output_dim);
  auto m = std::make_unique<Mlp>("generator", std::move(sizes), spec.activation);
  m->initialize(seed);
  return m;
}

std::unique_ptr<RbfNet> build_rbf(const RbfStudentSpec& spec, const Tensor2& centers, std::uint64_t seed) {
  spec.validate();
  if (centers.rows() != spec.centers || centers.cols() != spec.input_dim) {
    throw InvalidArgument("build_rbf: centers must be " + std::to_string(spec.centers) + "x" +
                          std::to_string(spec.input_dim));
  }
  auto m = std::make_unique<RbfNet>(spec.input_dim, spec.centers);
  auto& p = m->parameters();
  p[0] = centers;
  p[1].fill(std::log(spec.initial_width));
  nd::Rng rng(seed);
  glorot_fill(p[2], rng);
  p[3].fill(0.0);
  return m;
}

}  // namespace regraft::models
