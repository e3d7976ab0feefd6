#include "latentedit/pipeline.hpp"

#include <string>
#include <utility>
#include <variant>

namespace latentedit {

void validate(const FusionConfig& config) {
  if (!(config.alpha_mix >= 0.0 && config.alpha_mix <= 1.0))
    fail(errc::invalid_argument, "alpha_mix outside [0, 1]");
  if (!(config.alpha_init >= 0.0 && config.alpha_init <= 1.0))
    fail(errc::invalid_argument, "alpha_init outside [0, 1]");
  if (!(config.sharpen.gamma > 0.0)) fail(errc::invalid_argument, "gamma must be positive");
  if (config.block_size < 1) fail(errc::invalid_argument, "block_size must be >= 1");
  if (config.steps < 1) fail(errc::invalid_argument, "steps must be >= 1");
}

Grid fuse(const Grid& z, const Grid& z_ref, const SimilarityMap& s) {
  check_same_shape(z, z_ref, "fuse");
  const Shape& shape = z.shape();
  if (s.height() != shape.height || s.width() != shape.width)
    fail(errc::shape_mismatch, "fuse: similarity map dims do not match the latent");
  if (s.values().minCoeff() < 0.0 || s.values().maxCoeff() > 1.0)
    fail(errc::invalid_argument, "fuse: similarity values outside [0, 1]");

  const Eigen::ArrayXd weights = s.values().replicate(shape.channels, 1);
  const Eigen::ArrayXd lo = z.array().min(z_ref.array());
  const Eigen::ArrayXd hi = z.array().max(z_ref.array());
  const Eigen::ArrayXd blend =
      (z.array() + weights * (z_ref.array() - z.array())).max(lo).min(hi);
  Eigen::ArrayXd out = (weights == 0.0).select(z.array(), (weights == 1.0).select(z_ref.array(), blend));
  return Grid(shape, std::move(out));
}

Grid init_inversion_free(const Grid& z0, Seed seed, double alpha_init) {
  if (!(alpha_init >= 0.0 && alpha_init <= 1.0))
    fail(errc::invalid_argument, "alpha_init outside [0, 1]");
  return lerp(z0, sample_gaussian(z0.shape(), seed), alpha_init);
}

Trajectory pseudo_reference_chain(const Grid& z0, const Schedule& sched, Seed seed) {
  const Grid eps = sample_gaussian(z0.shape(), seed);
  std::vector<Grid> entries;
  entries.reserve(static_cast<std::size_t>(schedule_steps(sched)) + 1);
  if (const auto* ddim = std::get_if<DdimSchedule>(&sched)) {
    for (int t = 0; t <= ddim->num_steps(); ++t)
      entries.push_back(ddim_forward_diffuse(z0, eps, t, *ddim));
  } else {
    const auto& rf = std::get<RfSchedule>(sched);
    for (int i = 0; i <= rf.num_steps(); ++i)
      entries.push_back(rf_forward_diffuse(z0, eps, rf.time(i)));
  }
  return Trajectory(z0.shape(), std::move(entries));
}

namespace {

/// Shared denoise -> similarity -> fuse loop of both edit modes; starts
/// from the reference chain's noise-level entry and fuses at every step.
EditReport fusion_loop(Grid z, const Trajectory& reference, const DenoiserModel& model,
                       const ConditionId& target_condition, const Schedule& sched,
                       const FusionConfig& config, std::int64_t nfe_inversion,
                       EditArtifacts* artifacts) {
  const int steps = schedule_steps(sched);
  if (reference.num_steps() != steps)
    fail(errc::invalid_argument, "reference chain does not match the schedule");

  EditReport report{std::move(z), nfe_inversion, 0, {}};
  report.step_stats.reserve(static_cast<std::size_t>(steps));
  const std::int64_t evals_before = model.evaluations();

  for (int t = steps; t >= 1; --t) {
    Grid next = std::visit(
        [&](const auto& s) -> Grid {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, DdimSchedule>)
            return ddim_denoise_step(report.edited, t, model, target_condition, s);
          else
            return rf_denoise_step(report.edited, s.time(t), s.time(t - 1), model,
                                   target_condition);
        },
        sched);

    const Grid& ref = reference.entry(t - 1);
    const SimilarityMap cosine = cosine_map(next, ref);
    const SimilarityMap pooled = block_pool(cosine, config.block_size);
    const SimilarityMap mixed = mix_maps(cosine, pooled, config.alpha_mix);
    const SimilarityMap sharp = sharpen(mixed, config.sharpen);

    report.step_stats.push_back({t - 1, map_stats(sharp), map_stats(mixed)});
    report.edited = fuse(next, ref, sharp);
    if (artifacts) {
      artifacts->mixed.push_back(mixed);
      artifacts->sharpened.push_back(sharp);
      artifacts->fused.push_back(report.edited);
    }
  }

  report.nfe_denoise = model.evaluations() - evals_before;
  return report;
}

}  // namespace

EditReport edit_with_inversion(const Grid& z0_source, const DenoiserModel& model,
                               const ConditionId& source_condition,
                               const ConditionId& target_condition, const Schedule& sched,
                               const FusionConfig& config, EditArtifacts* artifacts) {
  validate(config);
  if (config.mode != EditMode::inversion)
    fail(errc::invalid_argument, "edit_with_inversion requires mode == inversion");
  if (config.steps != schedule_steps(sched))
    fail(errc::invalid_argument, "config steps do not match the schedule");

  const std::int64_t evals_before = model.evaluations();
  const Trajectory reference = invert_trajectory(z0_source, model, source_condition, sched);
  const std::int64_t nfe_inversion = model.evaluations() - evals_before;

  Grid z_start = reference.entry(reference.num_steps());
  return fusion_loop(std::move(z_start), reference, model, target_condition, sched, config,
                     nfe_inversion, artifacts);
}

EditReport edit_inversion_free(const Grid& z0_source, const DenoiserModel& model,
                               const ConditionId& target_condition, const Schedule& sched,
                               const FusionConfig& config, EditArtifacts* artifacts) {
  validate(config);
  if (config.mode != EditMode::inversion_free)
    fail(errc::invalid_argument, "edit_inversion_free requires mode == inversion_free");
  if (config.steps != schedule_steps(sched))
    fail(errc::invalid_argument, "config steps do not match the schedule");

  Grid z_start = init_inversion_free(z0_source, config.seed, config.alpha_init);
  const Trajectory reference = pseudo_reference_chain(z0_source, sched, config.seed);
  return fusion_loop(std::move(z_start), reference, model, target_condition, sched, config,
                     /*nfe_inversion=*/0, artifacts);
}

}  // namespace latentedit
