#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "regraft/models/kernel_ridge.hpp"
#include "regraft/models/teacher.hpp"
#include "regraft/ndcore/model.hpp"

// Versioned plain-text model files:
//
//   regraft-model v1 <kind>
//   <shape field> <value...>      one line per field
//   param_count <n>
//   <n parameter values, one per line, 17 significant digits, row-major>
//
// Kinds: mlp, generator, rbf, krr, command.
namespace regraft::models {

void write_model(std::ostream& out, const nd::DifferentiableModel& model);
void write_kernel_ridge(std::ostream& out, const KernelRidgePredictor& krr);
void write_teacher(std::ostream& out, const TeacherOracle& teacher);

// Parse failures throw ParseError naming the 1-based line.
std::unique_ptr<nd::DifferentiableModel> read_model(std::istream& in);
TeacherOracle read_teacher(std::istream& in);

void save_model(const nd::DifferentiableModel& model, const std::filesystem::path& path);
std::unique_ptr<nd::DifferentiableModel> load_model(const std::filesystem::path& path);
void save_teacher(const TeacherOracle& teacher, const std::filesystem::path& path);
TeacherOracle load_teacher(const std::filesystem::path& path);

}  // namespace regraft::models
