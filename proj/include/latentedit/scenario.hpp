#pragma once

#include "latentedit/grid.hpp"
#include "latentedit/metrics.hpp"
#include "latentedit/mixture.hpp"

namespace latentedit {

/// Rectangular edit region in grid coordinates; may be empty (pure
/// reconstruction) or cover the whole plane (global edit).
struct MaskRect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool empty() const { return width == 0 || height == 0; }
};

/// Localized-edit fixture parameters: one background attractor shared by
/// both conditions, per-condition attractors inside the edit region, and
/// the sampling noise around the source attractor.
struct ScenarioSpec {
  Shape shape{4, 16, 16};
  MaskRect edit_region{4, 4, 8, 8};
  double background_level = 1.8;
  double source_edit_level = 1.8;
  double target_edit_level = -1.8;
  double component_sigma = 0.9;  // mixture component std dev
  double sample_sigma = 0.9;     // std dev of z0 around the source attractor
  Seed seed;
};

struct Scenario {
  Grid z0_source;
  MixtureDenoiser denoiser;  // conditions "source" and "target"
  Grid source_mean;
  Grid target_mean;
  MaskRect edit_region;
  Shape shape;
};

/// Builds the source latent plus a two-condition mixture whose attractors
/// agree outside the edit region and differ inside it.
Scenario generate_scenario(const ScenarioSpec& spec);

/// Pixel masks for the edit region and its complement (the background).
RegionMask edit_region_mask(const Shape& shape, const MaskRect& rect);
RegionMask background_mask(const Shape& shape, const MaskRect& rect);

inline const ConditionId kSourceCondition{"source"};
inline const ConditionId kTargetCondition{"target"};

}  // namespace latentedit
