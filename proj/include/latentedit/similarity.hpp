#pragma once

#include <string>
#include <vector>

#include "latentedit/grid.hpp"

namespace latentedit {

/// H x W spatial map of similarity scores, indexed h * width + w. Raw maps
/// (cosine, block, mixed) live in [-1, 1]; sharpened maps lie strictly
/// inside (0, 1). All values are finite by construction.
class SimilarityMap {
 public:
  SimilarityMap(int height, int width, Eigen::ArrayXd values);

  int height() const { return height_; }
  int width() const { return width_; }
  const Eigen::ArrayXd& values() const { return values_; }
  double operator()(int h, int w) const {
    return values_[static_cast<Eigen::Index>(h) * width_ + w];
  }

 private:
  int height_;
  int width_;
  Eigen::ArrayXd values_;
};

/// Logistic sharpening parameters: gain gamma (> 0) and dynamic-range
/// weight lambda for the adaptive threshold tau = mean + lambda * (max - min).
struct SharpenParams {
  double gamma = 100.0;
  double lambda = 0.08;
};

/// Settings outside the recommended search ranges (gamma in [20, 200],
/// lambda in [0.04, 0.12]) are permitted; this reports them as warnings.
std::vector<std::string> sharpen_warnings(const SharpenParams& params);

/// Per-pixel cosine similarity between the C-dimensional channel vectors of
/// a and b. Zero channel vectors are treated as uninformative (cosine 0)
/// via a floor on the norm product; values are clipped into [-1, 1].
SimilarityMap cosine_map(const Grid& a, const Grid& b);

/// Tile-average pooling: non-overlapping block x block tiles anchored at
/// (0, 0), edge tiles averaged over their actual pixel count, tile means
/// broadcast back to full resolution.
SimilarityMap block_pool(const SimilarityMap& map, int block);

/// block_pool(cosine_map(a, b), block).
SimilarityMap block_map(const Grid& a, const Grid& b, int block);

/// alpha * cosine + (1 - alpha) * block, alpha in [0, 1].
SimilarityMap mix_maps(const SimilarityMap& cosine, const SimilarityMap& block, double alpha);

/// Adaptive logistic contrast: tau = mean + lambda * (max - min) computed
/// from this map, then 1 / (1 + exp(-gamma * (v - tau))) per pixel, clamped
/// into the open unit interval. A constant map sharpens to exactly 0.5.
SimilarityMap sharpen(const SimilarityMap& s_mix, const SharpenParams& params);

struct MapStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double variance = 0.0;  // population variance
};

MapStats map_stats(const SimilarityMap& map);

}  // namespace latentedit
