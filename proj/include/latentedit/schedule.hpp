#pragma once

#include <variant>
#include <vector>

#include "latentedit/grid.hpp"
#include "latentedit/model.hpp"

namespace latentedit {

/// DDIM noise schedule over the inference grid: alpha_bar(t) for
/// t = 0 .. num_steps, strictly decreasing with alpha_bar(0) == 1 (clean
/// data) and alpha_bar(num_steps) > 0. Immutable after construction.
class DdimSchedule {
 public:
  /// `train_indices` maps inference step t = 1 .. T to the underlying
  /// training timestep; may be empty for hand-built schedules.
  DdimSchedule(std::vector<double> alpha_bar, std::vector<int> train_indices = {});

  int num_steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
  double alpha_bar(int t) const;
  int train_index(int t) const;

 private:
  std::vector<double> alpha_bar_;
  std::vector<int> train_indices_;
};

/// alpha_bar from a linearly spaced beta grid of `num_train_steps` points,
/// cumulative product of (1 - beta), subsampled to `num_steps` inference
/// steps with uniform stride so the last training step is included;
/// alpha_bar(0) := 1 is prepended for the clean-data endpoint.
DdimSchedule build_ddim_schedule(int num_steps, double beta_start, double beta_end,
                                 int num_train_steps);

/// Rectified-flow timestep grid over [0, 1]: time(0) == 0, time(num_steps)
/// == 1, strictly increasing. Immutable after construction.
class RfSchedule {
 public:
  explicit RfSchedule(std::vector<double> times);

  static RfSchedule uniform(int num_steps);

  int num_steps() const { return static_cast<int>(times_.size()) - 1; }
  double time(int i) const;

 private:
  std::vector<double> times_;
};

using Schedule = std::variant<DdimSchedule, RfSchedule>;

int schedule_steps(const Schedule& sched);

/// Ordered latent chain z_0 .. z_T, exactly one entry per schedule
/// timestep, all of one shape. Immutable after construction.
class Trajectory {
 public:
  Trajectory(Shape shape, std::vector<Grid> entries);

  int num_steps() const { return static_cast<int>(entries_.size()) - 1; }
  const Shape& shape() const { return shape_; }
  const Grid& entry(int t) const;

 private:
  Shape shape_;
  std::vector<Grid> entries_;
};

// Single-step transitions. DDIM steps use inference indices t in [1, T];
// "previous" always means the previous inference timestep of the schedule.

/// sqrt(alpha_bar_t) * z0 + sqrt(1 - alpha_bar_t) * eps
Grid ddim_forward_diffuse(const Grid& z0, const Grid& eps, int t, const DdimSchedule& sched);

Grid ddim_denoise_step(const Grid& z_t, int t, const DenoiserModel& model,
                       const ConditionId& condition, const DdimSchedule& sched);

Grid ddim_invert_step(const Grid& z_prev, int t, const DenoiserModel& model,
                      const ConditionId& condition, const DdimSchedule& sched);

/// t * eps + (1 - t) * z0, t in [0, 1]
Grid rf_forward_diffuse(const Grid& z0, const Grid& eps, double t);

/// Euler step down: z + (t_prev - t_cur) * V(z, t_cur), 0 <= t_prev < t_cur <= 1
Grid rf_denoise_step(const Grid& z, double t_cur, double t_prev, const DenoiserModel& model,
                     const ConditionId& condition);

/// Euler step up: z + (t_cur - t_prev) * V(z, t_prev)
Grid rf_invert_step(const Grid& z, double t_cur, double t_prev, const DenoiserModel& model,
                    const ConditionId& condition);

/// DDIM transition coefficients, exposed for direct algebraic checks.
struct StepCoeffs {
  double on_z = 0.0;
  double on_pred = 0.0;
};

StepCoeffs ddim_denoise_coeffs(double alpha_bar_prev, double alpha_bar_cur);
StepCoeffs ddim_invert_coeffs(double alpha_bar_prev, double alpha_bar_cur);

/// Inversion chain z*_0 .. z*_T from a clean latent, one predictor
/// evaluation per step.
Trajectory invert_trajectory(const Grid& z0, const DenoiserModel& model,
                             const ConditionId& condition, const Schedule& sched);

/// Plain sampling loop from a noise-level latent down to z_0, no fusion.
Grid denoise_chain(const Grid& z_start, const DenoiserModel& model,
                   const ConditionId& condition, const Schedule& sched);

}  // namespace latentedit
