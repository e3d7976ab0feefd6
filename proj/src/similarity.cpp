#include "latentedit/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace latentedit {

namespace {

constexpr double kNormFloor = 1e-12;
// Largest double below 1; sharpened maps are clamped into
// [DBL_MIN, kBelowOne] so fusion is always a strict blend.
constexpr double kBelowOne = 0x1.fffffffffffffp-1;

double stable_logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_same_dims(const SimilarityMap& a, const SimilarityMap& b, const char* where) {
  if (a.height() != b.height() || a.width() != b.width())
    fail(errc::shape_mismatch, std::string(where) + ": map dims differ");
}

}  // namespace

SimilarityMap::SimilarityMap(int height, int width, Eigen::ArrayXd values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height_ < 1 || width_ < 1)
    fail(errc::invalid_argument, "similarity map dims must be >= 1");
  if (values_.size() != static_cast<Eigen::Index>(height_) * width_)
    fail(errc::invalid_argument, "similarity map data size mismatch");
  if (!values_.allFinite())
    fail(errc::non_finite, "similarity map contains non-finite values");
}

std::vector<std::string> sharpen_warnings(const SharpenParams& params) {
  std::vector<std::string> warnings;
  if (params.gamma < 20.0 || params.gamma > 200.0)
    warnings.push_back("gamma " + std::to_string(params.gamma) +
                       " outside the recommended range [20, 200]");
  if (params.lambda < 0.04 || params.lambda > 0.12)
    warnings.push_back("lambda " + std::to_string(params.lambda) +
                       " outside the recommended range [0.04, 0.12]");
  if (params.lambda < 0.0)
    warnings.push_back("negative lambda places the threshold below the map mean");
  return warnings;
}

SimilarityMap cosine_map(const Grid& a, const Grid& b) {
  check_same_shape(a, b, "cosine_map");
  const Shape& shape = a.shape();
  const Eigen::Index plane = shape.spatial();

  using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                     Eigen::RowMajor>>;
  RowMajorMap ma(a.array().data(), shape.channels, plane);
  RowMajorMap mb(b.array().data(), shape.channels, plane);

  const Eigen::ArrayXd dots = (ma.array() * mb.array()).colwise().sum().transpose();
  const Eigen::ArrayXd norm_a = ma.colwise().norm().transpose().array();
  const Eigen::ArrayXd norm_b = mb.colwise().norm().transpose().array();
  const Eigen::ArrayXd denom = (norm_a * norm_b).max(kNormFloor);
  Eigen::ArrayXd cos = (dots / denom).min(1.0).max(-1.0);
  return SimilarityMap(shape.height, shape.width, std::move(cos));
}

SimilarityMap block_pool(const SimilarityMap& map, int block) {
  if (block < 1) fail(errc::invalid_argument, "block size must be >= 1");
  if (block == 1) return map;
  const int height = map.height();
  const int width = map.width();
  Eigen::ArrayXd out(static_cast<Eigen::Index>(height) * width);
  for (int h0 = 0; h0 < height; h0 += block) {
    const int h1 = std::min(h0 + block, height);
    for (int w0 = 0; w0 < width; w0 += block) {
      const int w1 = std::min(w0 + block, width);
      double sum = 0.0;
      for (int h = h0; h < h1; ++h)
        for (int w = w0; w < w1; ++w) sum += map(h, w);
      const double mean = sum / (static_cast<double>(h1 - h0) * (w1 - w0));
      for (int h = h0; h < h1; ++h)
        for (int w = w0; w < w1; ++w)
          out[static_cast<Eigen::Index>(h) * width + w] = mean;
    }
  }
  return SimilarityMap(height, width, std::move(out));
}

SimilarityMap block_map(const Grid& a, const Grid& b, int block) {
  return block_pool(cosine_map(a, b), block);
}

SimilarityMap mix_maps(const SimilarityMap& cosine, const SimilarityMap& block, double alpha) {
  check_same_dims(cosine, block, "mix_maps");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    fail(errc::invalid_argument, "mix weight " + std::to_string(alpha) + " outside [0, 1]");
  return SimilarityMap(cosine.height(), cosine.width(),
                       alpha * cosine.values() + (1.0 - alpha) * block.values());
}

SimilarityMap sharpen(const SimilarityMap& s_mix, const SharpenParams& params) {
  if (!(params.gamma > 0.0)) fail(errc::invalid_argument, "gamma must be positive");
  const double lo = s_mix.values().minCoeff();
  const double hi = s_mix.values().maxCoeff();
  if (lo == hi) {
    // Zero dynamic range: tau == mean == the constant, logistic(0) == 1/2.
    return SimilarityMap(s_mix.height(), s_mix.width(),
                         Eigen::ArrayXd::Constant(s_mix.values().size(), 0.5));
  }
  const double tau = s_mix.values().mean() + params.lambda * (hi - lo);
  Eigen::ArrayXd out(s_mix.values().size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double s = stable_logistic(params.gamma * (s_mix.values()[i] - tau));
    out[i] = std::clamp(s, std::numeric_limits<double>::min(), kBelowOne);
  }
  return SimilarityMap(s_mix.height(), s_mix.width(), std::move(out));
}

MapStats map_stats(const SimilarityMap& map) {
  MapStats stats;
  stats.mean = map.values().mean();
  stats.min = map.values().minCoeff();
  stats.max = map.values().maxCoeff();
  stats.variance = (map.values() - stats.mean).square().mean();
  return stats;
}

}  // namespace latentedit
