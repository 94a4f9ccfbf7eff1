#pragma once

#include <filesystem>
#include <memory>
#include <ostream>
#include <vector>

#include "regraft/cli/config.hpp"
#include "regraft/data/dataset.hpp"
#include "regraft/distill/distill.hpp"
#include "regraft/models/teacher.hpp"

namespace regraft::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kRuntimeError = 2;

struct DataBundle {
  bool present = false;
  data::Split split;
  std::size_t dim = 0;
};

// Loads, splits and scales the configured data source.
DataBundle load_data(const RunConfig& cfg);

synth::SamplerSpec make_sampler_spec(const RunConfig& cfg, const DataBundle& data, std::size_t dim);
distill::DistillConfig make_distill_config(const RunConfig& cfg, const DataBundle& data, std::size_t dim);
std::unique_ptr<nd::DifferentiableModel> make_student(const RunConfig& cfg, const DataBundle& data, std::size_t dim);
models::TeacherOracle train_teacher(const RunConfig& cfg, const DataBundle& data, std::ostream& log);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<distill::MetricsRow>& rows);
std::string format_real(double v);

// Subcommands; each returns an exit code and writes resolved.cfg into the
// output directory.
int cmd_train_teacher(const RunConfig& cfg, std::ostream& out);
int cmd_distill(const RunConfig& cfg, std::ostream& out);
int cmd_evaluate(const RunConfig& cfg, std::ostream& out);
int cmd_gen_dump(const RunConfig& cfg, std::ostream& out);
int cmd_bounds_check(const RunConfig& cfg, std::ostream& out);

// argv[1] is the subcommand. Errors go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace regraft::cli
