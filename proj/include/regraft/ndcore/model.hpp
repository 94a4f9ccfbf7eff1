#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "regraft/ndcore/tape.hpp"
#include "regraft/ndcore/tensor.hpp"

namespace regraft::nd {

// A parameterized network that can be replayed on a Tape, giving gradients
// w.r.t. both its parameters and its inputs.
class DifferentiableModel {
 public:
  virtual ~DifferentiableModel() = default;

  virtual std::string_view kind() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual std::unique_ptr<DifferentiableModel> clone() const = 0;

  // Records the forward pass. `params` are tape handles for parameters(), in
  // the same order.
  virtual Var forward(Var batch, std::span<const Var> params) const = 0;

  std::vector<Tensor2>& parameters() noexcept { return params_; }
  const std::vector<Tensor2>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept;

  // Registers parameters as leaves (trainable) or constants.
  std::vector<Var> bind(Tape& tape, bool trainable) const;

  // forward() with constant parameters.
  Var apply(Var batch) const;

  // Plain evaluation; throws InvalidArgument when batch width != input_dim().
  Tensor2 predict(const Tensor2& batch) const;

  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);

 protected:
  void check_input(const Tensor2& batch) const;

  std::vector<Tensor2> params_;
};

// Max over all parameters and input entries of
//   |analytic - central difference| / max(1, |analytic|)
// for the scalar sum of the model's outputs at `point`.
double finite_diff_check(const DifferentiableModel& model, const Tensor2& point, double step);

}  // namespace regraft::nd
