#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latentedit/pipeline.hpp"
#include "latentedit/scenario.hpp"

namespace latentedit {

// Run configuration, loaded from a strict TOML-subset file. Recognized
// sections and keys are listed in the README; unknown sections or keys are
// rejected with an error naming them.

struct MixtureFileComponent {
  double weight = 1.0;
  double variance = 1.0;
  std::string mean_file;
};

struct ScenarioConfig {
  enum class Kind { localized_edit, mixture_files };

  Kind kind = Kind::localized_edit;
  ScenarioSpec spec;             // localized_edit parameters (seed included)
  std::string z0_file;           // mixture_files: source latent path
  std::map<std::string, std::vector<MixtureFileComponent>> conditions;
};

struct OutputConfig {
  std::string directory = "out";
  bool export_latents = false;
  bool export_maps = false;
};

struct RunConfig {
  FusionConfig fusion;
  double beta_start = 0.00085;
  double beta_end = 0.012;
  int num_train_steps = 1000;
  ScenarioConfig scenario;
  OutputConfig output;
};

RunConfig parse_run_config(std::string_view text, const std::string& origin);
RunConfig load_run_config(const std::filesystem::path& path);

Schedule build_schedule(const RunConfig& config);

/// Materialized inputs of one run: the source latent and its denoiser, plus
/// the edit region and target attractor when the scenario defines them.
struct RunInputs {
  Grid z0;
  MixtureDenoiser denoiser;
  std::optional<MaskRect> edit_region;
  std::optional<Grid> target_mean;
  Shape shape;
};

RunInputs build_inputs(const ScenarioConfig& scenario,
                       const std::filesystem::path& base_dir);

}  // namespace latentedit
