#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "latentedit/grid.hpp"
#include "latentedit/model.hpp"

namespace testutil {

using latentedit::ConditionId;
using latentedit::DenoiserModel;
using latentedit::Grid;
using latentedit::Seed;
using latentedit::Shape;

inline Grid make_grid(const Shape& shape, std::vector<double> values) {
  Grid::Array data(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    data[static_cast<Eigen::Index>(i)] = values[i];
  return Grid(shape, std::move(data));
}

inline Grid random_grid(const Shape& shape, std::uint64_t seed, double scale = 1.0,
                        double offset = 0.0) {
  const Grid noise = latentedit::sample_gaussian(shape, Seed{seed});
  return Grid(shape, scale * noise.array() + offset);
}

inline bool bit_equal(const Grid& a, const Grid& b) {
  return a.shape() == b.shape() && (a.array() == b.array()).all();
}

/// Predictors fixed to one constant value; condition-independent.
class ConstantModel final : public DenoiserModel {
 public:
  explicit ConstantModel(double value) : value_(value) {}

 private:
  Grid do_predict_noise(const Grid& z, int, const ConditionId&) const override {
    return Grid(z.shape(), Grid::Array::Constant(z.size(), value_));
  }
  Grid do_predict_velocity(const Grid& z, double, const ConditionId&) const override {
    return Grid(z.shape(), Grid::Array::Constant(z.size(), value_));
  }

  double value_;
};

/// Predictors backed by arbitrary callables.
class FunctionalModel final : public DenoiserModel {
 public:
  using NoiseFn = std::function<Grid(const Grid&, int, const ConditionId&)>;
  using VelocityFn = std::function<Grid(const Grid&, double, const ConditionId&)>;

  FunctionalModel(NoiseFn noise, VelocityFn velocity)
      : noise_(std::move(noise)), velocity_(std::move(velocity)) {}

 private:
  Grid do_predict_noise(const Grid& z, int t, const ConditionId& c) const override {
    return noise_(z, t, c);
  }
  Grid do_predict_velocity(const Grid& z, double t, const ConditionId& c) const override {
    return velocity_(z, t, c);
  }

  NoiseFn noise_;
  VelocityFn velocity_;
};

}  // namespace testutil
