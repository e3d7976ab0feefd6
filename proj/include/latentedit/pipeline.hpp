#pragma once

#include <cstdint>
#include <vector>

#include "latentedit/grid.hpp"
#include "latentedit/model.hpp"
#include "latentedit/schedule.hpp"
#include "latentedit/similarity.hpp"

namespace latentedit {

enum class SamplerKind { ddim, rf };
enum class EditMode { inversion, inversion_free };

/// Hyperparameters of one edit run. `alpha_mix` weighs per-pixel against
/// block-pooled similarity; `alpha_init` is the source weight of the
/// inversion-free initial latent. The two are independent knobs.
struct FusionConfig {
  double alpha_mix = 0.5;
  SharpenParams sharpen;
  int block_size = 4;
  double alpha_init = 0.7;
  SamplerKind sampler = SamplerKind::ddim;
  int steps = 15;
  Seed seed;
  EditMode mode = EditMode::inversion;
};

void validate(const FusionConfig& config);

/// Similarity-map statistics recorded at one denoising step.
struct StepStats {
  int step = 0;  // schedule index of the latent being produced
  MapStats sharpened;
  MapStats mixed;
};

struct EditReport {
  Grid edited;
  std::int64_t nfe_inversion = 0;
  std::int64_t nfe_denoise = 0;
  std::vector<StepStats> step_stats;
};

/// Per-step intermediates collected on request (map export, debugging).
/// Entries are ordered like EditReport::step_stats.
struct EditArtifacts {
  std::vector<SimilarityMap> mixed;
  std::vector<SimilarityMap> sharpened;
  std::vector<Grid> fused;
};

/// z + s * (ref - z) per channel, the H x W map broadcast across channels.
/// s must lie in [0, 1]; s == 0 and s == 1 reproduce z resp. ref bit-exactly
/// and the blend is clamped into the elementwise interval spanned by the
/// inputs, so the result is always a convex combination.
Grid fuse(const Grid& z, const Grid& z_ref, const SimilarityMap& s);

/// alpha_init * z0 + (1 - alpha_init) * eps with eps drawn from the seed.
Grid init_inversion_free(const Grid& z0, Seed seed, double alpha_init);

/// Forward-diffused reference chain z*_t for every schedule timestep, all
/// sharing one eps drawn from the seed so consecutive references stay
/// spatially coherent. Zero predictor evaluations.
Trajectory pseudo_reference_chain(const Grid& z0, const Schedule& sched, Seed seed);

/// Invert the source latent under the source condition, then denoise under
/// the target condition, fusing each fresh latent with its reference:
/// z_{t-1} <- fuse(z_{t-1}, z*_{t-1}, S(z_{t-1}, z*_{t-1})) at every step,
/// the last one included.
EditReport edit_with_inversion(const Grid& z0_source, const DenoiserModel& model,
                               const ConditionId& source_condition,
                               const ConditionId& target_condition, const Schedule& sched,
                               const FusionConfig& config, EditArtifacts* artifacts = nullptr);

/// Same fusion loop, but the initial latent comes from init_inversion_free
/// and the references from pseudo_reference_chain; no inversion pass, so
/// predictor evaluations are halved.
EditReport edit_inversion_free(const Grid& z0_source, const DenoiserModel& model,
                               const ConditionId& target_condition, const Schedule& sched,
                               const FusionConfig& config, EditArtifacts* artifacts = nullptr);

}  // namespace latentedit
