#include "latentedit/scenario.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace latentedit {

namespace {

// Smooth channel-diverse base field in [0.2, 1]: per-channel sinusoids with
// distinct frequencies and phases, so channel vectors vary across the plane
// and never vanish.
double base_field(const Shape& shape, int c, int h, int w) {
  const double fy = 1.0 + c % 3;
  const double fx = 1.0 + (c + 1) % 3;
  const double phase = 2.0 * std::numbers::pi * c / shape.channels + 0.7;
  const double arg = 2.0 * std::numbers::pi *
                         (fy * (h + 0.5) / shape.height + fx * (w + 0.5) / shape.width) +
                     phase;
  return 0.6 + 0.4 * std::sin(arg);
}

bool inside(const MaskRect& rect, int h, int w) {
  return h >= rect.y0 && h < rect.y0 + rect.height && w >= rect.x0 && w < rect.x0 + rect.width;
}

void check_rect(const Shape& shape, const MaskRect& rect) {
  if (rect.width < 0 || rect.height < 0 || rect.x0 < 0 || rect.y0 < 0 ||
      rect.x0 + rect.width > shape.width || rect.y0 + rect.height > shape.height)
    fail(errc::invalid_argument, "edit region out of bounds for shape " + shape.str());
}

Grid attractor_mean(const Shape& shape, const MaskRect& rect, double background_level,
                    double edit_level) {
  Grid::Array data(shape.volume());
  Eigen::Index i = 0;
  for (int c = 0; c < shape.channels; ++c)
    for (int h = 0; h < shape.height; ++h)
      for (int w = 0; w < shape.width; ++w, ++i) {
        const double level = inside(rect, h, w) ? edit_level : background_level;
        data[i] = level * base_field(shape, c, h, w);
      }
  return Grid(shape, std::move(data));
}

}  // namespace

RegionMask edit_region_mask(const Shape& shape, const MaskRect& rect) {
  check_shape(shape);
  check_rect(shape, rect);
  std::vector<std::uint8_t> include(static_cast<std::size_t>(shape.spatial()), 0);
  for (int h = 0; h < shape.height; ++h)
    for (int w = 0; w < shape.width; ++w)
      if (inside(rect, h, w))
        include[static_cast<std::size_t>(h) * shape.width + w] = 1;
  return RegionMask(shape.height, shape.width, std::move(include));
}

RegionMask background_mask(const Shape& shape, const MaskRect& rect) {
  return edit_region_mask(shape, rect).complement();
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  check_shape(spec.shape);
  check_rect(spec.shape, spec.edit_region);
  if (!(spec.component_sigma >= 0.0 && spec.sample_sigma >= 0.0))
    fail(errc::invalid_argument, "scenario sigmas must be nonnegative");

  Grid source_mean =
      attractor_mean(spec.shape, spec.edit_region, spec.background_level, spec.source_edit_level);
  Grid target_mean =
      attractor_mean(spec.shape, spec.edit_region, spec.background_level, spec.target_edit_level);

  const Grid noise = sample_gaussian(spec.shape, spec.seed);
  Grid z0(spec.shape, source_mean.array() + spec.sample_sigma * noise.array());

  MixtureDenoiser denoiser;
  const double variance = spec.component_sigma * spec.component_sigma;
  denoiser.set_condition(kSourceCondition, {{1.0, source_mean, variance}});
  denoiser.set_condition(kTargetCondition, {{1.0, target_mean, variance}});

  return Scenario{std::move(z0),        std::move(denoiser), std::move(source_mean),
                  std::move(target_mean), spec.edit_region,    spec.shape};
}

}  // namespace latentedit
