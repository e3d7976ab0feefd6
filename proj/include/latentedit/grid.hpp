#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "latentedit/errors.hpp"
#include "latentedit/rng.hpp"

namespace latentedit {

/// Dimensions of a latent grid: C channels over an H x W spatial plane.
struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  friend bool operator==(const Shape&, const Shape&) = default;

  bool valid() const {
    if (channels < 1 || height < 1 || width < 1) return false;
    const auto limit = std::numeric_limits<std::int64_t>::max() / 16;
    const std::int64_t plane = static_cast<std::int64_t>(height) * width;
    return plane <= limit / channels;
  }

  std::int64_t spatial() const { return static_cast<std::int64_t>(height) * width; }
  std::int64_t volume() const { return channels * spatial(); }

  std::string str() const {
    return std::to_string(channels) + "x" + std::to_string(height) + "x" +
           std::to_string(width);
  }
};

inline void check_shape(const Shape& shape) {
  if (!shape.valid()) fail(errc::invalid_argument, "invalid shape " + shape.str());
}

/// Dense C x H x W grid of reals, stored flat in row-major order (channel
/// slowest, width fastest). Elements are finite by construction; values are
/// immutable after construction.
template <typename Scalar>
class BasicGrid {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  BasicGrid(Shape shape, Array data) : shape_(shape), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_.volume())
      fail(errc::invalid_argument, "grid data has " + std::to_string(data_.size()) +
                                       " elements, shape " + shape_.str() + " needs " +
                                       std::to_string(shape_.volume()));
    if (!data_.allFinite()) fail(errc::non_finite, "grid contains non-finite values");
  }

  const Shape& shape() const { return shape_; }
  const Array& array() const { return data_; }
  Eigen::Index size() const { return data_.size(); }

  Eigen::Index flat_index(int c, int h, int w) const {
    return (static_cast<Eigen::Index>(c) * shape_.height + h) * shape_.width + w;
  }

  Scalar operator()(int c, int h, int w) const { return data_[flat_index(c, h, w)]; }

 private:
  Shape shape_;
  Array data_;
};

using Grid = BasicGrid<double>;

inline void check_same_shape(const Grid& a, const Grid& b, const char* where) {
  if (!(a.shape() == b.shape()))
    fail(errc::shape_mismatch, std::string(where) + ": shape " + a.shape().str() +
                                   " vs " + b.shape().str());
}

inline Grid zeros(const Shape& shape) {
  check_shape(shape);
  return Grid(shape, Grid::Array::Zero(shape.volume()));
}

/// I.i.d. standard-normal grid; a pure function of (shape, seed).
inline Grid sample_gaussian(const Shape& shape, Seed seed) {
  check_shape(shape);
  GaussianSampler gauss(seed);
  Grid::Array data(shape.volume());
  for (Eigen::Index i = 0; i < data.size(); ++i) data[i] = gauss.next();
  return Grid(shape, std::move(data));
}

/// w * a + (1 - w) * b elementwise, w in [0, 1].
inline Grid lerp(const Grid& a, const Grid& b, double w) {
  check_same_shape(a, b, "lerp");
  if (!(w >= 0.0 && w <= 1.0))
    fail(errc::invalid_argument, "lerp weight " + std::to_string(w) + " outside [0, 1]");
  if (w == 1.0) return a;
  if (w == 0.0) return b;
  return Grid(a.shape(), w * a.array() + (1.0 - w) * b.array());
}

inline double l2_norm(const Grid& g) { return g.array().matrix().norm(); }

/// ||a - b||_2 / ||b||_2; the reference b must not be all-zero.
inline double l2_relative_error(const Grid& a, const Grid& b) {
  check_same_shape(a, b, "l2_relative_error");
  const double denom = l2_norm(b);
  if (denom == 0.0)
    fail(errc::invalid_argument, "l2_relative_error: reference grid has zero norm");
  return (a.array() - b.array()).matrix().norm() / denom;
}

}  // namespace latentedit
