#include "regraft/ndcore/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "regraft/error.hpp"
#include "regraft/ndcore/ops.hpp"

namespace regraft::nd {

std::size_t DifferentiableModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

std::vector<Var> DifferentiableModel::bind(Tape& tape, bool trainable) const {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(trainable ? tape.leaf(p) : tape.constant(p));
  return vars;
}

Var DifferentiableModel::apply(Var batch) const {
  check_input(batch.value());
  const auto vars = bind(batch.tape(), false);
  return forward(batch, vars);
}

Tensor2 DifferentiableModel::predict(const Tensor2& batch) const {
  check_input(batch);
  Tape tape;
  Var x = tape.constant(batch);
  const auto vars = bind(tape, false);
  return forward(x, vars).value();
}

void DifferentiableModel::check_input(const Tensor2& batch) const {
  if (batch.cols() != input_dim()) {
    throw InvalidArgument(std::string(kind()) + ": batch width " + std::to_string(batch.cols()) +
                          " does not match input dimension " + std::to_string(input_dim()));
  }
  if (batch.rows() == 0) throw InvalidArgument(std::string(kind()) + ": empty batch");
}

std::vector<double> DifferentiableModel::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& p : params_) flat.insert(flat.end(), p.values().begin(), p.values().end());
  return flat;
}

void DifferentiableModel::set_flat_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw InvalidArgument("set_flat_parameters: expected " + std::to_string(parameter_count()) +
                          " values, got " + std::to_string(flat.size()));
  }
  std::size_t off = 0;
  for (auto& p : params_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), p.size(), p.values().begin());
    off += p.size();
  }
}

namespace {

double output_sum(const DifferentiableModel& m, const Tensor2& x) {
  double s = 0.0;
  const Tensor2 y = m.predict(x);
  for (double v : y.values()) s += v;
  return s;
}

double rel_err(double analytic, double numeric) {
  return std::fabs(analytic - numeric) / std::max(1.0, std::fabs(analytic));
}

}  // namespace

double finite_diff_check(const DifferentiableModel& model, const Tensor2& point, double step) {
  if (!(step > 0.0)) throw InvalidArgument("finite_diff_check: step must be positive");
  Tape tape;
  Var x = tape.leaf(point);
  const auto params = model.bind(tape, true);
  Var total = sum_all(model.forward(x, params));
  tape.backward(total);

  double worst = 0.0;
  auto probe = model.clone();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor2 analytic = tape.grad(params[k]);
    Tensor2& p = probe->parameters()[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      p[i] = orig + step;
      const double up = output_sum(*probe, point);
      p[i] = orig - step;
      const double down = output_sum(*probe, point);
      p[i] = orig;
      worst = std::max(worst, rel_err(analytic[i], (up - down) / (2.0 * step)));
    }
  }
  const Tensor2 gx = tape.grad(x);
  Tensor2 moved = point;
  for (std::size_t i = 0; i < moved.size(); ++i) {
    const double orig = moved[i];
    moved[i] = orig + step;
    const double up = output_sum(model, moved);
    moved[i] = orig - step;
    const double down = output_sum(model, moved);
    moved[i] = orig;
    worst = std::max(worst, rel_err(gx[i], (up - down) / (2.0 * step)));
  }
  return worst;
}

}  // namespace regraft::nd
