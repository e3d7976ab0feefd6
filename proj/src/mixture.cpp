#include "latentedit/mixture.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace latentedit {

namespace {

constexpr double kWeightSumTolerance = 1e-12;
// Floor applied to marginal variances inside log densities and gains so the
// sigma^2 == 0 point-mass case stays well-defined.
constexpr double kVarFloor = 1e-300;

}  // namespace

void MixtureDenoiser::set_condition(ConditionId condition,
                                    std::vector<GaussianComponent> components) {
  if (components.empty())
    fail(errc::invalid_argument, "condition '" + condition.label + "' has no components");
  const Shape shape = components.front().mean.shape();
  double weight_sum = 0.0;
  for (const GaussianComponent& comp : components) {
    if (!(comp.weight > 0.0))
      fail(errc::invalid_argument, "component weights must be positive");
    if (!(comp.variance >= 0.0))
      fail(errc::invalid_argument, "component variances must be nonnegative");
    if (!(comp.mean.shape() == shape))
      fail(errc::shape_mismatch, "component means must share one shape");
    weight_sum += comp.weight;
  }
  if (std::abs(weight_sum - 1.0) > kWeightSumTolerance)
    fail(errc::invalid_argument, "component weights must sum to 1 (got " +
                                     std::to_string(weight_sum) + ")");
  if (!conditions_.empty() && !(this->shape() == shape))
    fail(errc::shape_mismatch, "conditions must share one latent shape");
  conditions_[condition.label] = std::move(components);
}

bool MixtureDenoiser::has_condition(const ConditionId& condition) const {
  return conditions_.contains(condition.label);
}

const std::vector<GaussianComponent>& MixtureDenoiser::components(
    const ConditionId& condition) const {
  const auto it = conditions_.find(condition.label);
  if (it == conditions_.end())
    fail(errc::invalid_argument, "unknown condition '" + condition.label + "'");
  return it->second;
}

Shape MixtureDenoiser::shape() const {
  if (conditions_.empty()) fail(errc::invalid_argument, "mixture has no conditions");
  return conditions_.begin()->second.front().mean.shape();
}

MixtureDenoiser::ComponentLaw MixtureDenoiser::ddim_law(const GaussianComponent& comp,
                                                        double alpha_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0))
    fail(errc::invalid_argument, "alpha_bar outside (0, 1]");
  ComponentLaw law;
  law.scale = std::sqrt(alpha_bar);
  law.var = alpha_bar * comp.variance + (1.0 - alpha_bar);
  law.gain = law.scale * comp.variance / std::max(law.var, kVarFloor);
  return law;
}

MixtureDenoiser::ComponentLaw MixtureDenoiser::rf_law(const GaussianComponent& comp, double t) {
  if (!(t >= 0.0 && t <= 1.0)) fail(errc::invalid_argument, "RF time outside [0, 1]");
  ComponentLaw law;
  law.scale = 1.0 - t;
  law.var = law.scale * law.scale * comp.variance + t * t;
  law.gain = law.scale * comp.variance / std::max(law.var, kVarFloor);
  return law;
}

std::vector<Eigen::ArrayXd> MixtureDenoiser::responsibilities(
    const Grid& z, const std::vector<ComponentLaw>& laws, const ConditionId& condition) const {
  const auto& comps = components(condition);
  if (!(z.shape() == comps.front().mean.shape()))
    fail(errc::shape_mismatch, "query shape " + z.shape().str() + " vs mixture shape " +
                                   comps.front().mean.shape().str());
  const std::size_t k_count = comps.size();
  if (k_count == 1) return {Eigen::ArrayXd::Ones(z.size())};

  // Log Bayes weights per element, stabilized by the per-element maximum.
  std::vector<Eigen::ArrayXd> log_post(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const ComponentLaw& law = laws[k];
    const double var = std::max(law.var, kVarFloor);
    const Eigen::ArrayXd diff = z.array() - law.scale * comps[k].mean.array();
    log_post[k] = std::log(comps[k].weight) - 0.5 * std::log(var) -
                  diff.square() / (2.0 * var);
  }
  Eigen::ArrayXd max_log = log_post[0];
  for (std::size_t k = 1; k < k_count; ++k) max_log = max_log.max(log_post[k]);
  Eigen::ArrayXd denom = Eigen::ArrayXd::Zero(z.size());
  std::vector<Eigen::ArrayXd> resp(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    resp[k] = (log_post[k] - max_log).exp();
    denom += resp[k];
  }
  for (std::size_t k = 0; k < k_count; ++k) resp[k] /= denom;
  return resp;
}

Grid MixtureDenoiser::posterior_mean(const Grid& z, const std::vector<ComponentLaw>& laws,
                                     const ConditionId& condition) const {
  const auto& comps = components(condition);
  const std::vector<Eigen::ArrayXd> resp = responsibilities(z, laws, condition);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(z.size());
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const ComponentLaw& law = laws[k];
    const Eigen::ArrayXd cond_mean =
        comps[k].mean.array() + law.gain * (z.array() - law.scale * comps[k].mean.array());
    out += resp[k] * cond_mean;
  }
  return Grid(z.shape(), std::move(out));
}

Grid MixtureDenoiser::posterior_mean_ddim_at(const Grid& z, double alpha_bar,
                                             const ConditionId& condition) const {
  const auto& comps = components(condition);
  std::vector<ComponentLaw> laws;
  laws.reserve(comps.size());
  for (const auto& comp : comps) laws.push_back(ddim_law(comp, alpha_bar));
  return posterior_mean(z, laws, condition);
}

Grid MixtureDenoiser::posterior_mean_ddim(const Grid& z, int t, const DdimSchedule& sched,
                                          const ConditionId& condition) const {
  return posterior_mean_ddim_at(z, sched.alpha_bar(t), condition);
}

Grid MixtureDenoiser::posterior_mean_rf(const Grid& z, double t,
                                        const ConditionId& condition) const {
  const auto& comps = components(condition);
  std::vector<ComponentLaw> laws;
  laws.reserve(comps.size());
  for (const auto& comp : comps) laws.push_back(rf_law(comp, t));
  return posterior_mean(z, laws, condition);
}

Grid MixtureDenoiser::predict_noise_at(const Grid& z, double alpha_bar,
                                       const ConditionId& condition) const {
  if (!(alpha_bar < 1.0))
    fail(errc::invalid_argument,
         "noise prediction is undefined at the clean endpoint (alpha_bar == 1)");
  const Grid post = posterior_mean_ddim_at(z, alpha_bar, condition);
  const double scale = std::sqrt(alpha_bar);
  const double noise_scale = std::sqrt(1.0 - alpha_bar);
  return Grid(z.shape(), (z.array() - scale * post.array()) / noise_scale);
}

Grid MixtureDenoiser::predict_noise(const Grid& z, int t, const DdimSchedule& sched,
                                    const ConditionId& condition) const {
  return predict_noise_at(z, sched.alpha_bar(t), condition);
}

Grid MixtureDenoiser::predict_velocity(const Grid& z, double t,
                                       const ConditionId& condition) const {
  if (!(t > 0.0 && t <= 1.0))
    fail(errc::invalid_argument, "velocity prediction needs t in (0, 1]");
  const Grid post = posterior_mean_rf(z, t, condition);
  return Grid(z.shape(), (z.array() - post.array()) / t);
}

std::vector<Eigen::ArrayXd> MixtureDenoiser::responsibilities_ddim(
    const Grid& z, double alpha_bar, const ConditionId& condition) const {
  const auto& comps = components(condition);
  std::vector<ComponentLaw> laws;
  laws.reserve(comps.size());
  for (const auto& comp : comps) laws.push_back(ddim_law(comp, alpha_bar));
  return responsibilities(z, laws, condition);
}

std::vector<Eigen::ArrayXd> MixtureDenoiser::responsibilities_rf(
    const Grid& z, double t, const ConditionId& condition) const {
  const auto& comps = components(condition);
  std::vector<ComponentLaw> laws;
  laws.reserve(comps.size());
  for (const auto& comp : comps) laws.push_back(rf_law(comp, t));
  return responsibilities(z, laws, condition);
}

MixtureModel::MixtureModel(const MixtureDenoiser& mixture, std::optional<DdimSchedule> schedule)
    : mixture_(&mixture), schedule_(std::move(schedule)) {}

Grid MixtureModel::do_predict_noise(const Grid& z, int t, const ConditionId& condition) const {
  if (!schedule_)
    fail(errc::invalid_argument, "noise prediction needs a DDIM schedule");
  const double alpha_bar = schedule_->alpha_bar(t);
  if (alpha_bar == 1.0) return zeros(z.shape());  // E[eps | z_0] = 0
  return mixture_->predict_noise_at(z, alpha_bar, condition);
}

Grid MixtureModel::do_predict_velocity(const Grid& z, double t,
                                       const ConditionId& condition) const {
  if (t == 0.0) return Grid(z.shape(), -z.array());  // E[eps - z_0 | z_0 = z] = -z
  return mixture_->predict_velocity(z, t, condition);
}

}  // namespace latentedit
