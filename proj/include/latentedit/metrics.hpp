#pragma once

#include <cstdint>
#include <vector>

#include "latentedit/grid.hpp"

namespace latentedit {

/// Spatial inclusion mask for region-restricted error metrics.
class RegionMask {
 public:
  RegionMask(int height, int width, std::vector<std::uint8_t> include);

  static RegionMask full(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  bool includes(int h, int w) const {
    return include_[static_cast<std::size_t>(h) * width_ + w] != 0;
  }
  std::int64_t count() const;
  RegionMask complement() const;

 private:
  int height_;
  int width_;
  std::vector<std::uint8_t> include_;
};

/// Mean squared difference over all C*H*W elements.
double mse(const Grid& a, const Grid& b);

/// Mean squared difference over the masked pixels (all channels); the mask
/// must select at least one pixel.
double mse(const Grid& a, const Grid& b, const RegionMask& region);

/// 10 * log10(max_val^2 / mse); +infinity for identical inputs.
double psnr(const Grid& a, const Grid& b, double max_val);
double psnr(const Grid& a, const Grid& b, double max_val, const RegionMask& region);

/// Single-scale SSIM with the reference settings: 11 x 11 Gaussian window
/// (sigma 1.5), C1 = (0.01 * range)^2, C2 = (0.03 * range)^2, averaged over
/// channels and valid window positions. Requires H, W >= 11.
double ssim(const Grid& a, const Grid& b, double dynamic_range);

struct MetricReport {
  double mse_value = 0.0;
  double psnr_db = 0.0;  // +infinity sentinel for identical inputs
  double ssim_value = 0.0;
};

MetricReport compute_metrics(const Grid& a, const Grid& b, double dynamic_range);

}  // namespace latentedit
