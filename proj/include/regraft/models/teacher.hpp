#pragma once

#include <memory>
#include <string>
#include <variant>

#include "regraft/models/kernel_ridge.hpp"
#include "regraft/ndcore/model.hpp"

namespace regraft::models {

// Runs a local executable: the batch is written as headerless CSV to its
// stdin, one prediction per line is read back from stdout.
struct CommandTeacher {
  std::string command;
  std::size_t input_dim = 1;
};

// Prediction-only view of a teacher. Only a teacher backed by a
// DifferentiableModel exposes gradients.
class TeacherOracle {
 public:
  static TeacherOracle from_model(std::shared_ptr<const nd::DifferentiableModel> model);
  static TeacherOracle from_kernel_ridge(KernelRidgePredictor predictor);
  static TeacherOracle from_command(CommandTeacher command);

  bool gradient_capable() const noexcept;
  std::size_t input_dim() const;
  std::string kind() const;

  nd::Tensor2 predict(const nd::Tensor2& batch) const;

  // Throws CapabilityError for black-box teachers.
  const nd::DifferentiableModel& differentiable() const;

  const KernelRidgePredictor* kernel_ridge() const noexcept;
  const CommandTeacher* command() const noexcept;

 private:
  using Backing = std::variant<std::shared_ptr<const nd::DifferentiableModel>, KernelRidgePredictor, CommandTeacher>;
  explicit TeacherOracle(Backing b) : backing_(std::move(b)) {}

  Backing backing_;
};

}  // namespace regraft::models
