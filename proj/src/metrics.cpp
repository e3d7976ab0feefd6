#include "latentedit/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace latentedit {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

std::array<double, kSsimWindow> ssim_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - (kSsimWindow - 1) / 2.0;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Valid-mode separable Gaussian blur of one H x W channel plane:
// horizontal pass into H x (W-10), then vertical into (H-10) x (W-10).
Eigen::ArrayXXd blur_valid(const Eigen::ArrayXXd& plane, const std::array<double, kSsimWindow>& k) {
  const Eigen::Index h = plane.rows();
  const Eigen::Index w = plane.cols();
  const Eigen::Index wv = w - kSsimWindow + 1;
  const Eigen::Index hv = h - kSsimWindow + 1;
  Eigen::ArrayXXd horiz(h, wv);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < wv; ++c) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[static_cast<std::size_t>(i)] * plane(r, c + i);
      horiz(r, c) = acc;
    }
  Eigen::ArrayXXd out(hv, wv);
  for (Eigen::Index r = 0; r < hv; ++r)
    for (Eigen::Index c = 0; c < wv; ++c) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[static_cast<std::size_t>(i)] * horiz(r + i, c);
      out(r, c) = acc;
    }
  return out;
}

Eigen::ArrayXXd channel_plane(const Grid& g, int channel) {
  const Shape& s = g.shape();
  Eigen::ArrayXXd plane(s.height, s.width);
  for (int h = 0; h < s.height; ++h)
    for (int w = 0; w < s.width; ++w) plane(h, w) = g(channel, h, w);
  return plane;
}

}  // namespace

RegionMask::RegionMask(int height, int width, std::vector<std::uint8_t> include)
    : height_(height), width_(width), include_(std::move(include)) {
  if (height_ < 1 || width_ < 1) fail(errc::invalid_argument, "mask dims must be >= 1");
  if (include_.size() != static_cast<std::size_t>(height_) * width_)
    fail(errc::invalid_argument, "mask data size mismatch");
}

RegionMask RegionMask::full(int height, int width) {
  return RegionMask(height, width,
                    std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, 1));
}

std::int64_t RegionMask::count() const {
  std::int64_t n = 0;
  for (const auto v : include_) n += v != 0;
  return n;
}

RegionMask RegionMask::complement() const {
  std::vector<std::uint8_t> flipped(include_.size());
  for (std::size_t i = 0; i < include_.size(); ++i) flipped[i] = include_[i] ? 0 : 1;
  return RegionMask(height_, width_, std::move(flipped));
}

double mse(const Grid& a, const Grid& b) {
  check_same_shape(a, b, "mse");
  return (a.array() - b.array()).square().mean();
}

double mse(const Grid& a, const Grid& b, const RegionMask& region) {
  check_same_shape(a, b, "mse");
  const Shape& s = a.shape();
  if (region.height() != s.height || region.width() != s.width)
    fail(errc::shape_mismatch, "mask dims do not match the grids");
  const std::int64_t pixels = region.count();
  if (pixels == 0) fail(errc::invalid_argument, "mask selects no pixels");
  double acc = 0.0;
  for (int c = 0; c < s.channels; ++c)
    for (int h = 0; h < s.height; ++h)
      for (int w = 0; w < s.width; ++w)
        if (region.includes(h, w)) {
          const double d = a(c, h, w) - b(c, h, w);
          acc += d * d;
        }
  return acc / (static_cast<double>(pixels) * s.channels);
}

namespace {

double psnr_from_mse(double mse_value, double max_val) {
  if (!(max_val > 0.0)) fail(errc::invalid_argument, "max_val must be positive");
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_val * max_val / mse_value);
}

}  // namespace

double psnr(const Grid& a, const Grid& b, double max_val) {
  return psnr_from_mse(mse(a, b), max_val);
}

double psnr(const Grid& a, const Grid& b, double max_val, const RegionMask& region) {
  return psnr_from_mse(mse(a, b, region), max_val);
}

double ssim(const Grid& a, const Grid& b, double dynamic_range) {
  check_same_shape(a, b, "ssim");
  if (!(dynamic_range > 0.0)) fail(errc::invalid_argument, "dynamic_range must be positive");
  const Shape& s = a.shape();
  if (s.height < kSsimWindow || s.width < kSsimWindow)
    fail(errc::invalid_argument, "ssim needs spatial dims >= " + std::to_string(kSsimWindow));

  const auto kernel = ssim_kernel();
  const double c1 = (kSsimK1 * dynamic_range) * (kSsimK1 * dynamic_range);
  const double c2 = (kSsimK2 * dynamic_range) * (kSsimK2 * dynamic_range);

  double total = 0.0;
  for (int ch = 0; ch < s.channels; ++ch) {
    const Eigen::ArrayXXd x = channel_plane(a, ch);
    const Eigen::ArrayXXd y = channel_plane(b, ch);
    const Eigen::ArrayXXd mu_x = blur_valid(x, kernel);
    const Eigen::ArrayXXd mu_y = blur_valid(y, kernel);
    const Eigen::ArrayXXd sigma_x = blur_valid(x * x, kernel) - mu_x * mu_x;
    const Eigen::ArrayXXd sigma_y = blur_valid(y * y, kernel) - mu_y * mu_y;
    const Eigen::ArrayXXd sigma_xy = blur_valid(x * y, kernel) - mu_x * mu_y;
    const Eigen::ArrayXXd numer =
        (2.0 * mu_x * mu_y + c1) * (2.0 * sigma_xy + c2);
    const Eigen::ArrayXXd denom =
        (mu_x * mu_x + mu_y * mu_y + c1) * (sigma_x + sigma_y + c2);
    total += (numer / denom).mean();
  }
  return total / s.channels;
}

MetricReport compute_metrics(const Grid& a, const Grid& b, double dynamic_range) {
  MetricReport report;
  report.mse_value = mse(a, b);
  report.psnr_db = psnr_from_mse(report.mse_value, dynamic_range);
  report.ssim_value = ssim(a, b, dynamic_range);
  return report;
}

}  // namespace latentedit
