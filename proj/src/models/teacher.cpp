#include "regraft/models/teacher.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "regraft/error.hpp"

namespace regraft::models {

namespace {

nd::Tensor2 run_command(const CommandTeacher& cmd, const nd::Tensor2& batch) {
  if (batch.cols() != cmd.input_dim) {
    throw InvalidArgument("command teacher: batch width " + std::to_string(batch.cols()) +
                          " does not match input dimension " + std::to_string(cmd.input_dim));
  }
  static std::uint64_t counter = 0;
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("regraft-teacher-" + std::to_string(::getpid()) + "-" + std::to_string(++counter) + ".csv");
  {
    std::ofstream out(tmp);
    char buf[32];
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      for (std::size_t c = 0; c < batch.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", batch(r, c));
        if (c) out << ',';
        out << buf;
      }
      out << '\n';
    }
  }
  const std::string line = "(" + cmd.command + ") < '" + tmp.string() + "'";
  FILE* pipe = ::popen(line.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(tmp);
    throw NumericError("command teacher: failed to start '" + cmd.command + "'");
  }
  std::vector<double> preds;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe)) {
    std::string s(buf);
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
    if (s.empty()) continue;
    try {
      std::size_t used = 0;
      preds.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      ::pclose(pipe);
      std::filesystem::remove(tmp);
      throw ParseError("command teacher: non-numeric output '" + s + "'", preds.size() + 1);
    }
  }
  const int status = ::pclose(pipe);
  std::filesystem::remove(tmp);
  if (status != 0) throw NumericError("command teacher: '" + cmd.command + "' exited with status " + std::to_string(status));
  if (preds.size() != batch.rows()) {
    throw NumericError("command teacher: expected " + std::to_string(batch.rows()) + " predictions, got " +
                       std::to_string(preds.size()));
  }
  return nd::Tensor2::column(std::move(preds));
}

}  // namespace

TeacherOracle TeacherOracle::from_model(std::shared_ptr<const nd::DifferentiableModel> model) {
  if (!model) throw InvalidArgument("TeacherOracle: null model");
  if (model->output_dim() != 1) throw InvalidArgument("TeacherOracle: teacher must have a single output");
  return TeacherOracle(Backing(std::move(model)));
}

TeacherOracle TeacherOracle::from_kernel_ridge(KernelRidgePredictor predictor) {
  return TeacherOracle(Backing(std::move(predictor)));
}

TeacherOracle TeacherOracle::from_command(CommandTeacher command) {
  if (command.command.empty()) throw InvalidArgument("TeacherOracle: empty command");
  return TeacherOracle(Backing(std::move(command)));
}

bool TeacherOracle::gradient_capable() const noexcept { return backing_.index() == 0; }

std::size_t TeacherOracle::input_dim() const {
  switch (backing_.index()) {
    case 0: return std::get<0>(backing_)->input_dim();
    case 1: return std::get<1>(backing_).input_dim();
    default: return std::get<2>(backing_).input_dim;
  }
}

std::string TeacherOracle::kind() const {
  switch (backing_.index()) {
    case 0: return std::string(std::get<0>(backing_)->kind());
    case 1: return "krr";
    default: return "command";
  }
}

nd::Tensor2 TeacherOracle::predict(const nd::Tensor2& batch) const {
  switch (backing_.index()) {
    case 0: return std::get<0>(backing_)->predict(batch);
    case 1: return std::get<1>(backing_).predict(batch);
    default: return run_command(std::get<2>(backing_), batch);
  }
}

const nd::DifferentiableModel& TeacherOracle::differentiable() const {
  if (!gradient_capable()) throw CapabilityError("teacher '" + kind() + "' is a black box and exposes no gradients");
  return *std::get<0>(backing_);
}

const KernelRidgePredictor* TeacherOracle::kernel_ridge() const noexcept {
  return std::get_if<KernelRidgePredictor>(&backing_);
}

const CommandTeacher* TeacherOracle::command() const noexcept { return std::get_if<CommandTeacher>(&backing_); }

}  // namespace regraft::models
