#include "latentedit/schedule.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace latentedit {

DdimSchedule::DdimSchedule(std::vector<double> alpha_bar, std::vector<int> train_indices)
    : alpha_bar_(std::move(alpha_bar)), train_indices_(std::move(train_indices)) {
  if (alpha_bar_.size() < 2)
    fail(errc::invalid_argument, "DDIM schedule needs at least one inference step");
  if (alpha_bar_.front() != 1.0)
    fail(errc::invalid_argument, "DDIM schedule must start at alpha_bar = 1");
  for (std::size_t t = 1; t < alpha_bar_.size(); ++t) {
    if (!(alpha_bar_[t] > 0.0 && alpha_bar_[t] < alpha_bar_[t - 1]))
      fail(errc::invalid_argument,
           "DDIM alpha_bar must be strictly decreasing and positive (index " +
               std::to_string(t) + ")");
  }
  if (!train_indices_.empty() && train_indices_.size() != alpha_bar_.size() - 1)
    fail(errc::invalid_argument, "train index table does not match step count");
}

double DdimSchedule::alpha_bar(int t) const {
  if (t < 0 || t > num_steps())
    fail(errc::invalid_argument, "timestep " + std::to_string(t) + " outside [0, " +
                                     std::to_string(num_steps()) + "]");
  return alpha_bar_[static_cast<std::size_t>(t)];
}

int DdimSchedule::train_index(int t) const {
  if (train_indices_.empty())
    fail(errc::invalid_argument, "schedule carries no training-grid indices");
  if (t < 1 || t > num_steps())
    fail(errc::invalid_argument, "timestep " + std::to_string(t) + " outside [1, " +
                                     std::to_string(num_steps()) + "]");
  return train_indices_[static_cast<std::size_t>(t - 1)];
}

DdimSchedule build_ddim_schedule(int num_steps, double beta_start, double beta_end,
                                 int num_train_steps) {
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    fail(errc::invalid_argument, "beta range must satisfy 0 < beta_start <= beta_end < 1");
  if (num_train_steps < 1)
    fail(errc::invalid_argument, "num_train_steps must be >= 1");
  if (num_steps < 1 || num_steps > num_train_steps)
    fail(errc::invalid_argument, "num_steps must lie in [1, num_train_steps]");

  std::vector<double> train_alpha_bar(static_cast<std::size_t>(num_train_steps));
  double prod = 1.0;
  for (int i = 0; i < num_train_steps; ++i) {
    const double beta =
        num_train_steps == 1
            ? beta_start
            : beta_start + (beta_end - beta_start) * i / (num_train_steps - 1);
    prod *= 1.0 - beta;
    train_alpha_bar[static_cast<std::size_t>(i)] = prod;
  }

  // Uniform stride through the training grid, anchored at the last step.
  const int stride = num_train_steps / num_steps;
  std::vector<double> alpha_bar(static_cast<std::size_t>(num_steps) + 1);
  std::vector<int> train_indices(static_cast<std::size_t>(num_steps));
  alpha_bar[0] = 1.0;
  for (int t = 1; t <= num_steps; ++t) {
    const int idx = num_train_steps - 1 - (num_steps - t) * stride;
    train_indices[static_cast<std::size_t>(t - 1)] = idx;
    alpha_bar[static_cast<std::size_t>(t)] = train_alpha_bar[static_cast<std::size_t>(idx)];
  }
  return DdimSchedule(std::move(alpha_bar), std::move(train_indices));
}

RfSchedule::RfSchedule(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) fail(errc::invalid_argument, "RF schedule needs at least 2 timesteps");
  if (times_.front() != 0.0 || times_.back() != 1.0)
    fail(errc::invalid_argument, "RF schedule must span [0, 1] inclusive");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      fail(errc::invalid_argument, "RF timesteps must be strictly increasing");
}

RfSchedule RfSchedule::uniform(int num_steps) {
  if (num_steps < 1) fail(errc::invalid_argument, "RF schedule needs at least 1 step");
  std::vector<double> times(static_cast<std::size_t>(num_steps) + 1);
  for (int i = 0; i <= num_steps; ++i)
    times[static_cast<std::size_t>(i)] = static_cast<double>(i) / num_steps;
  return RfSchedule(std::move(times));
}

double RfSchedule::time(int i) const {
  if (i < 0 || i > num_steps())
    fail(errc::invalid_argument, "RF index " + std::to_string(i) + " outside [0, " +
                                     std::to_string(num_steps()) + "]");
  return times_[static_cast<std::size_t>(i)];
}

int schedule_steps(const Schedule& sched) {
  return std::visit([](const auto& s) { return s.num_steps(); }, sched);
}

Trajectory::Trajectory(Shape shape, std::vector<Grid> entries)
    : shape_(shape), entries_(std::move(entries)) {
  check_shape(shape_);
  if (entries_.size() < 2)
    fail(errc::invalid_argument, "trajectory needs at least two entries");
  for (const Grid& g : entries_)
    if (!(g.shape() == shape_))
      fail(errc::shape_mismatch, "trajectory entry shape " + g.shape().str() +
                                     " differs from " + shape_.str());
}

const Grid& Trajectory::entry(int t) const {
  if (t < 0 || t > num_steps())
    fail(errc::invalid_argument, "trajectory index " + std::to_string(t) + " outside [0, " +
                                     std::to_string(num_steps()) + "]");
  return entries_[static_cast<std::size_t>(t)];
}

Grid ddim_forward_diffuse(const Grid& z0, const Grid& eps, int t, const DdimSchedule& sched) {
  check_same_shape(z0, eps, "ddim_forward_diffuse");
  const double a = sched.alpha_bar(t);
  const double on_signal = std::sqrt(a);
  const double on_noise = std::sqrt(1.0 - a);
  return Grid(z0.shape(), on_signal * z0.array() + on_noise * eps.array());
}

StepCoeffs ddim_denoise_coeffs(double alpha_bar_prev, double alpha_bar_cur) {
  StepCoeffs c;
  c.on_z = std::sqrt(alpha_bar_prev / alpha_bar_cur);
  c.on_pred = std::sqrt(1.0 - alpha_bar_prev) -
              std::sqrt((1.0 - alpha_bar_cur) * (alpha_bar_prev / alpha_bar_cur));
  return c;
}

StepCoeffs ddim_invert_coeffs(double alpha_bar_prev, double alpha_bar_cur) {
  StepCoeffs c;
  c.on_z = std::sqrt(alpha_bar_cur / alpha_bar_prev);
  c.on_pred = std::sqrt(1.0 - alpha_bar_cur) -
              std::sqrt((1.0 - alpha_bar_prev) * (alpha_bar_cur / alpha_bar_prev));
  return c;
}

namespace {

void check_ddim_step_index(int t, const DdimSchedule& sched) {
  if (t < 1 || t > sched.num_steps())
    fail(errc::invalid_argument,
         "DDIM step index " + std::to_string(t) + " outside [1, " +
             std::to_string(sched.num_steps()) + "]");
}

void check_rf_step_times(double t_cur, double t_prev) {
  if (!(t_prev >= 0.0 && t_prev < t_cur && t_cur <= 1.0))
    fail(errc::invalid_argument, "RF step times must satisfy 0 <= t_prev < t_cur <= 1");
}

}  // namespace

Grid ddim_denoise_step(const Grid& z_t, int t, const DenoiserModel& model,
                       const ConditionId& condition, const DdimSchedule& sched) {
  check_ddim_step_index(t, sched);
  const StepCoeffs c = ddim_denoise_coeffs(sched.alpha_bar(t - 1), sched.alpha_bar(t));
  const Grid pred = model.predict_noise(z_t, t, condition);
  check_same_shape(pred, z_t, "ddim_denoise_step predictor output");
  return Grid(z_t.shape(), c.on_z * z_t.array() + c.on_pred * pred.array());
}

Grid ddim_invert_step(const Grid& z_prev, int t, const DenoiserModel& model,
                      const ConditionId& condition, const DdimSchedule& sched) {
  check_ddim_step_index(t, sched);
  const StepCoeffs c = ddim_invert_coeffs(sched.alpha_bar(t - 1), sched.alpha_bar(t));
  const Grid pred = model.predict_noise(z_prev, t - 1, condition);
  check_same_shape(pred, z_prev, "ddim_invert_step predictor output");
  return Grid(z_prev.shape(), c.on_z * z_prev.array() + c.on_pred * pred.array());
}

Grid rf_forward_diffuse(const Grid& z0, const Grid& eps, double t) {
  check_same_shape(z0, eps, "rf_forward_diffuse");
  if (!(t >= 0.0 && t <= 1.0))
    fail(errc::invalid_argument, "RF time " + std::to_string(t) + " outside [0, 1]");
  return Grid(z0.shape(), t * eps.array() + (1.0 - t) * z0.array());
}

Grid rf_denoise_step(const Grid& z, double t_cur, double t_prev, const DenoiserModel& model,
                     const ConditionId& condition) {
  check_rf_step_times(t_cur, t_prev);
  const Grid v = model.predict_velocity(z, t_cur, condition);
  check_same_shape(v, z, "rf_denoise_step predictor output");
  return Grid(z.shape(), z.array() + (t_prev - t_cur) * v.array());
}

Grid rf_invert_step(const Grid& z, double t_cur, double t_prev, const DenoiserModel& model,
                    const ConditionId& condition) {
  check_rf_step_times(t_cur, t_prev);
  const Grid v = model.predict_velocity(z, t_prev, condition);
  check_same_shape(v, z, "rf_invert_step predictor output");
  return Grid(z.shape(), z.array() + (t_cur - t_prev) * v.array());
}

Trajectory invert_trajectory(const Grid& z0, const DenoiserModel& model,
                             const ConditionId& condition, const Schedule& sched) {
  std::vector<Grid> entries;
  entries.reserve(static_cast<std::size_t>(schedule_steps(sched)) + 1);
  entries.push_back(z0);
  if (const auto* ddim = std::get_if<DdimSchedule>(&sched)) {
    for (int t = 1; t <= ddim->num_steps(); ++t)
      entries.push_back(ddim_invert_step(entries.back(), t, model, condition, *ddim));
  } else {
    const auto& rf = std::get<RfSchedule>(sched);
    for (int i = 1; i <= rf.num_steps(); ++i)
      entries.push_back(rf_invert_step(entries.back(), rf.time(i), rf.time(i - 1), model, condition));
  }
  return Trajectory(z0.shape(), std::move(entries));
}

Grid denoise_chain(const Grid& z_start, const DenoiserModel& model,
                   const ConditionId& condition, const Schedule& sched) {
  Grid z = z_start;
  if (const auto* ddim = std::get_if<DdimSchedule>(&sched)) {
    for (int t = ddim->num_steps(); t >= 1; --t)
      z = ddim_denoise_step(z, t, model, condition, *ddim);
  } else {
    const auto& rf = std::get<RfSchedule>(sched);
    for (int i = rf.num_steps(); i >= 1; --i)
      z = rf_denoise_step(z, rf.time(i), rf.time(i - 1), model, condition);
  }
  return z;
}

}  // namespace latentedit
