#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "regraft/models/teacher.hpp"
#include "regraft/synthgen/direct.hpp"
#include "regraft/synthgen/gen_loss.hpp"

namespace regraft::bounds {

using nd::Tensor2;

inline constexpr double kSlack = 1e-12;

enum class KConvention { TraceWide, InitialPoint, Supplied };
std::string_view to_string(KConvention c);

struct BoundReport {
  std::string check;  // "displacement" or "generator-norm"
  std::size_t t = 0;
  std::size_t d = 0;
  double eta = 0.0;
  double k_hat = 0.0;
  KConvention k_convention = KConvention::Supplied;
  double bound = 0.0;
  double observed = 0.0;
  bool satisfied = false;
  // Displacement only: eta * sum_s |g_s| for the row with the largest
  // displacement, and whether that inequality held for every row.
  std::optional<double> exact_bound;
  std::optional<bool> exact_satisfied;
  bool advisory = false;
  std::string note;
};

// Maps a batch of points (rows) to the gradient at each row, same shape.
using GradientFn = std::function<Tensor2(const Tensor2&)>;

// Max over samples and coordinates of |gradient|.
double estimate_lipschitz(const GradientFn& gradient, const Tensor2& samples);

// Gradient of the per-row generator loss at each row. Throws CapabilityError
// for a teacher without gradients. Holds references to teacher and student.
GradientFn gen_loss_gradient_fn(const synth::GenLossSpec& spec, const models::TeacherOracle& teacher,
                                const nd::DifferentiableModel& student, std::optional<double> y_rand);

// Max |g| over every gradient stored in the trace (final point included).
double trace_k_hat(const synth::OptimizeResult& result);

// Per-row check of |x_t - x_0| <= eta * t * sqrt(d) * K and of the exact
// |x_t - x_0| <= eta * sum_{s<t} |g_s|, d being the row width. `observed` is
// the largest row displacement. Without `k_hat` the convention decides how K
// is estimated from the trace. Rejects non-gd traces.
BoundReport check_displacement_bound(const synth::OptimizeResult& result, std::optional<double> k_hat = std::nullopt,
                                     KConvention convention = KConvention::TraceWide);

// |x_g| <= sqrt(d) * K / (2 beta); observed is the largest row norm. The
// bound assumes a converged generator, so the report is advisory.
BoundReport check_generator_norm_bound(const Tensor2& x_g, double beta, double k_hat, std::size_t d);

}  // namespace regraft::bounds
