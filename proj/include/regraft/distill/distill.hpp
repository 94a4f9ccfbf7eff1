#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "regraft/data/dataset.hpp"
#include "regraft/models/networks.hpp"
#include "regraft/models/teacher.hpp"
#include "regraft/ndcore/loss.hpp"
#include "regraft/ndcore/optimizer.hpp"
#include "regraft/synthgen/direct.hpp"
#include "regraft/synthgen/sampler.hpp"

namespace regraft::distill {

using nd::Tensor2;
using nd::Var;

enum class AlphaKind { Constant, LinearDecreasing };

struct AlphaSchedule {
  AlphaKind kind = AlphaKind::LinearDecreasing;
  double value = 0.0;  // constant
  double start = 1.0;  // linear
  double end = 0.0;

  static AlphaSchedule constant(double v) { return {AlphaKind::Constant, v, v, v}; }
  static AlphaSchedule linear(double s, double e) { return {AlphaKind::LinearDecreasing, 0.0, s, e}; }
  bool is_constant(double v) const noexcept { return kind == AlphaKind::Constant && value == v; }
  void validate() const;
};

AlphaKind parse_alpha_kind(std::string_view s);
std::string_view to_string(AlphaKind k);

// constant -> value; linear -> start + (end - start) * epoch / t_max, clamped to [0,1].
double alpha_at(const AlphaSchedule& schedule, std::size_t epoch, std::size_t t_max);

double combined_loss(double alpha, double loss_g, double loss_p);

enum class Strategy { Random, Generator, Direct };
Strategy parse_strategy(std::string_view s);
std::string_view to_string(Strategy s);

struct SynthSpec {
  Strategy strategy = Strategy::Direct;
  synth::SamplerSpec sampler;  // x0 for direct, x_g itself for random
  synth::GenLossSpec loss;
  synth::OptimizeSpec optimize;
  models::GeneratorSpec generator;
  nd::OptimizerSettings generator_optimizer{nd::OptimizerKind::RmsProp, 1e-3, 0.99, 1e-8, 0.0};
  std::size_t generator_rounds = 1;  // generator updates per student batch
  bool reemit_after_update = true;
};

struct DistillConfig {
  std::size_t epochs = 2000;
  std::size_t batches_per_epoch = 10;
  std::size_t batch_size = 50;
  AlphaSchedule alpha;
  bool double_at_edge = true;
  nd::OptimizerSettings student_optimizer{nd::OptimizerKind::RmsProp, 1e-3, 0.99, 1e-8, 1e-5};
  nd::LossKind student_loss = nd::LossKind::Mse;
  SynthSpec synth;
  synth::SamplerSpec xp_sampler;
  std::size_t validation_every = 1;
  std::uint64_t data_seed = 1;
  std::uint64_t init_seed = 2;
  std::uint64_t synth_seed = 3;

  void validate() const;
};

struct MetricsRow {
  std::size_t epoch = 0;  // 1-based
  double loss_combined = 0.0;
  std::optional<double> loss_xg;  // absent when the branch is skipped
  std::optional<double> loss_xp;
  double alpha = 0.0;
  std::optional<double> val_rmse;
  double wall_s = 0.0;
};

struct DistillResult {
  std::unique_ptr<nd::DifferentiableModel> best;
  std::unique_ptr<nd::DifferentiableModel> final_model;
  std::vector<MetricsRow> metrics;
  std::optional<double> best_val_rmse;
  std::size_t best_epoch = 0;
};

// Called with epoch 0 before training and after every epoch with the 1-based
// epoch number.
using EpochCallback = std::function<void(std::size_t epoch, const nd::DifferentiableModel& student)>;

DistillResult distill_run(const DistillConfig& config, const models::TeacherOracle& teacher,
                          const nd::DifferentiableModel& student, const data::Dataset* validation = nullptr,
                          const EpochCallback& on_epoch = {});

enum class Metric { Rmse, Mae };
Metric parse_metric(std::string_view s);
std::string_view to_string(Metric m);

double evaluate(const nd::DifferentiableModel& model, const data::Dataset& dataset, Metric metric);
double evaluate(const models::TeacherOracle& model, const data::Dataset& dataset, Metric metric);
double score(const Tensor2& pred, const Tensor2& target, Metric metric);

}  // namespace regraft::distill
