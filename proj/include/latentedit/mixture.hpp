#pragma once

#include <map>
#include <optional>
#include <vector>

#include "latentedit/grid.hpp"
#include "latentedit/model.hpp"
#include "latentedit/schedule.hpp"

namespace latentedit {

/// One Gaussian component of a per-element mixture: weight, full-grid mean,
/// shared scalar variance.
struct GaussianComponent {
  double weight = 1.0;
  Grid mean;
  double variance = 1.0;  // sigma^2, >= 0
};

/// Gaussian-mixture data model with closed-form optimal predictors, one
/// component set per condition. Every element (c, h, w) carries an
/// independent scalar mixture sharing the component structure, so the
/// posterior is exact and fully local: conditions that share means over a
/// region have identical posteriors there.
///
/// For clean data z_0 ~ sum_k w_k N(mu_k, sigma_k^2) the noisy marginals are
///   DDIM (z_t = sqrt(a) z_0 + sqrt(1-a) eps):  z_t | k ~ N(sqrt(a) mu_k, a sigma_k^2 + 1 - a)
///   RF   (z_t = t eps + (1-t) z_0):            z_t | k ~ N((1-t) mu_k, (1-t)^2 sigma_k^2 + t^2)
/// Responsibilities are computed per element in the log domain.
class MixtureDenoiser {
 public:
  void set_condition(ConditionId condition, std::vector<GaussianComponent> components);

  bool has_condition(const ConditionId& condition) const;
  const std::vector<GaussianComponent>& components(const ConditionId& condition) const;
  Shape shape() const;

  /// E[z_0 | z_t, condition] under the DDIM marginal at timestep t.
  Grid posterior_mean_ddim(const Grid& z, int t, const DdimSchedule& sched,
                           const ConditionId& condition) const;
  Grid posterior_mean_ddim_at(const Grid& z, double alpha_bar, const ConditionId& condition) const;

  /// E[z_0 | z_t, condition] under the RF marginal at time t in [0, 1].
  Grid posterior_mean_rf(const Grid& z, double t, const ConditionId& condition) const;

  /// E[eps | z_t] = (z - sqrt(a) E[z_0 | z]) / sqrt(1 - a); undefined at the
  /// clean endpoint alpha_bar == 1 and rejected there.
  Grid predict_noise(const Grid& z, int t, const DdimSchedule& sched,
                     const ConditionId& condition) const;
  Grid predict_noise_at(const Grid& z, double alpha_bar, const ConditionId& condition) const;

  /// E[eps - z_0 | z_t] = (z - E[z_0 | z]) / t; undefined at t == 0 and
  /// rejected there.
  Grid predict_velocity(const Grid& z, double t, const ConditionId& condition) const;

  /// Per-element responsibilities (one array per component; each position
  /// sums to 1 across components).
  std::vector<Eigen::ArrayXd> responsibilities_ddim(const Grid& z, double alpha_bar,
                                                    const ConditionId& condition) const;
  std::vector<Eigen::ArrayXd> responsibilities_rf(const Grid& z, double t,
                                                  const ConditionId& condition) const;

 private:
  // Marginal of one component: z ~ N(scale * mu, var); E[z0 | z, k] = mu + gain * (z - scale * mu).
  struct ComponentLaw {
    double scale = 1.0;
    double var = 1.0;
    double gain = 0.0;
  };

  static ComponentLaw ddim_law(const GaussianComponent& comp, double alpha_bar);
  static ComponentLaw rf_law(const GaussianComponent& comp, double t);

  Grid posterior_mean(const Grid& z, const std::vector<ComponentLaw>& laws,
                      const ConditionId& condition) const;
  std::vector<Eigen::ArrayXd> responsibilities(const Grid& z,
                                               const std::vector<ComponentLaw>& laws,
                                               const ConditionId& condition) const;

  std::map<std::string, std::vector<GaussianComponent>> conditions_;
};

/// DenoiserModel view of a MixtureDenoiser (plus the DDIM schedule needed to
/// resolve integer timesteps). The raw predictors are singular exactly at
/// the clean-data endpoint, which is the first point every inversion chain
/// evaluates; this adapter substitutes the closed-form limits there:
///   F(z, t with alpha_bar == 1) = E[eps | z_0 = z] = 0
///   V(z, 0)                     = E[eps - z_0 | z_0 = z] = -z
/// The referenced mixture must outlive the adapter.
class MixtureModel final : public DenoiserModel {
 public:
  explicit MixtureModel(const MixtureDenoiser& mixture,
                        std::optional<DdimSchedule> schedule = std::nullopt);

 private:
  Grid do_predict_noise(const Grid& z, int t, const ConditionId& condition) const override;
  Grid do_predict_velocity(const Grid& z, double t, const ConditionId& condition) const override;

  const MixtureDenoiser* mixture_;
  std::optional<DdimSchedule> schedule_;
};

}  // namespace latentedit
