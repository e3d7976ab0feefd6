#pragma once

// Independent reference implementations used to compute and freeze expected
// values. Deliberately naive: scalar loops, direct density ratios, long
// double where it helps. Nothing here shares code with the library paths
// under test.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracles {

inline std::vector<long double> ddim_alpha_bar_table(int num_train, long double beta_start,
                                                     long double beta_end) {
  std::vector<long double> out(static_cast<std::size_t>(num_train));
  long double prod = 1.0L;
  for (int i = 0; i < num_train; ++i) {
    const long double beta =
        num_train == 1 ? beta_start
                       : beta_start + (beta_end - beta_start) * i / (num_train - 1);
    prod *= 1.0L - beta;
    out[static_cast<std::size_t>(i)] = prod;
  }
  return out;
}

inline long double ddim_denoise_scalar(long double z, long double pred, long double a_prev,
                                       long double a_cur) {
  return std::sqrt(a_prev / a_cur) * z +
         (std::sqrt(1.0L - a_prev) - std::sqrt((1.0L - a_cur) * a_prev / a_cur)) * pred;
}

inline long double ddim_invert_scalar(long double z, long double pred, long double a_prev,
                                      long double a_cur) {
  return std::sqrt(a_cur / a_prev) * z +
         (std::sqrt(1.0L - a_cur) - std::sqrt((1.0L - a_prev) * a_cur / a_prev)) * pred;
}

struct ScalarComponent {
  long double weight = 1.0L;
  long double mean = 0.0L;
  long double variance = 1.0L;
};

inline long double normal_pdf(long double x, long double mean, long double var) {
  const long double d = x - mean;
  return std::exp(-d * d / (2.0L * var)) / std::sqrt(2.0L * std::numbers::pi_v<long double> * var);
}

// Direct Bayes posterior mean E[z_0 | z] for a scalar observation whose
// per-component marginal is N(scale * mu_k, var_k) with conditional mean
// mu_k + gain_k * (z - scale * mu_k). No log-domain stabilization.
inline long double posterior_mean_ddim_scalar(long double z, long double alpha_bar,
                                              const std::vector<ScalarComponent>& comps) {
  const long double scale = std::sqrt(alpha_bar);
  long double num = 0.0L, den = 0.0L;
  for (const ScalarComponent& c : comps) {
    const long double var = alpha_bar * c.variance + (1.0L - alpha_bar);
    const long double w = c.weight * normal_pdf(z, scale * c.mean, var);
    const long double cond = c.mean + scale * c.variance / var * (z - scale * c.mean);
    num += w * cond;
    den += w;
  }
  return num / den;
}

inline long double posterior_mean_rf_scalar(long double z, long double t,
                                            const std::vector<ScalarComponent>& comps) {
  const long double scale = 1.0L - t;
  long double num = 0.0L, den = 0.0L;
  for (const ScalarComponent& c : comps) {
    const long double var = scale * scale * c.variance + t * t;
    const long double w = c.weight * normal_pdf(z, scale * c.mean, var);
    const long double cond = c.mean + scale * c.variance / var * (z - scale * c.mean);
    num += w * cond;
    den += w;
  }
  return num / den;
}

inline long double predict_noise_scalar(long double z, long double alpha_bar,
                                        const std::vector<ScalarComponent>& comps) {
  const long double post = posterior_mean_ddim_scalar(z, alpha_bar, comps);
  return (z - std::sqrt(alpha_bar) * post) / std::sqrt(1.0L - alpha_bar);
}

inline long double predict_velocity_scalar(long double z, long double t,
                                           const std::vector<ScalarComponent>& comps) {
  return (z - posterior_mean_rf_scalar(z, t, comps)) / t;
}

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Self-normalized importance-sampling estimate of E[f(z0) | z_t = z]:
// draw z0 from the mixture, weight by the transition density of z given z0,
// and report batch-mean spread as the standard error. Uses the standard
// library RNG, independent of the library's sampler.
template <typename Fn>
McEstimate mc_conditional(double z, const std::vector<ScalarComponent>& comps,
                          double trans_mean_coeff, double trans_var, Fn value_of_z0,
                          int samples, int batches, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  std::vector<double> batch_values;
  const int per_batch = samples / batches;
  for (int b = 0; b < batches; ++b) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < per_batch; ++i) {
      double pick = uniform(rng), z0 = 0.0;
      for (const ScalarComponent& c : comps) {
        if (pick <= static_cast<double>(c.weight) || &c == &comps.back()) {
          z0 = static_cast<double>(c.mean) +
               std::sqrt(static_cast<double>(c.variance)) * normal(rng);
          break;
        }
        pick -= static_cast<double>(c.weight);
      }
      const double d = z - trans_mean_coeff * z0;
      const double w = std::exp(-d * d / (2.0 * trans_var));
      num += w * value_of_z0(z0, d);
      den += w;
    }
    batch_values.push_back(num / den);
  }
  McEstimate est;
  for (double v : batch_values) est.value += v;
  est.value /= batches;
  double var = 0.0;
  for (double v : batch_values) var += (v - est.value) * (v - est.value);
  var /= (batches - 1);
  est.standard_error = std::sqrt(var / batches);
  return est;
}

// E[eps | z_t = z] under z_t = sqrt(a) z0 + sqrt(1-a) eps.
inline McEstimate mc_noise_given_zt(double z, double alpha_bar,
                                    const std::vector<ScalarComponent>& comps, int samples,
                                    int batches, std::uint64_t seed) {
  const double coeff = std::sqrt(alpha_bar);
  const double var = 1.0 - alpha_bar;
  return mc_conditional(
      z, comps, coeff, var,
      [&](double /*z0*/, double d) { return d / std::sqrt(var); }, samples, batches, seed);
}

// E[eps - z0 | z_t = z] under z_t = t eps + (1-t) z0.
inline McEstimate mc_velocity_given_zt(double z, double t,
                                       const std::vector<ScalarComponent>& comps, int samples,
                                       int batches, std::uint64_t seed) {
  return mc_conditional(
      z, comps, 1.0 - t, t * t,
      [&](double z0, double /*d*/) { return (z - z0) / t; }, samples, batches, seed);
}

inline long double logistic(long double x) { return 1.0L / (1.0L + std::exp(-x)); }

// Tile averages over non-overlapping block x block tiles, broadcast back.
inline std::vector<double> tile_average(const std::vector<double>& map, int height, int width,
                                        int block) {
  std::vector<double> out(map.size());
  for (int y0 = 0; y0 < height; y0 += block)
    for (int x0 = 0; x0 < width; x0 += block) {
      const int y1 = std::min(y0 + block, height);
      const int x1 = std::min(x0 + block, width);
      long double sum = 0.0L;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) sum += map[static_cast<std::size_t>(y) * width + x];
      const double mean = static_cast<double>(sum / ((y1 - y0) * (x1 - x0)));
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) out[static_cast<std::size_t>(y) * width + x] = mean;
    }
  return out;
}

inline double mse_naive(const std::vector<double>& a, const std::vector<double>& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - b[i];
    acc += d * d;
  }
  return static_cast<double>(acc / a.size());
}

// Direct windowed SSIM: per valid 11x11 window position, weighted moments
// accumulated with an explicitly built 2-D kernel.
inline double ssim_naive(const std::vector<double>& a, const std::vector<double>& b,
                         int channels, int height, int width, double range) {
  constexpr int kWin = 11;
  double kernel[kWin][kWin];
  double ksum = 0.0;
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) {
      const double dy = i - 5.0, dx = j - 5.0;
      kernel[i][j] = std::exp(-(dy * dy + dx * dx) / (2.0 * 1.5 * 1.5));
      ksum += kernel[i][j];
    }
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) kernel[i][j] /= ksum;

  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  double total = 0.0;
  for (int ch = 0; ch < channels; ++ch) {
    const std::size_t base = static_cast<std::size_t>(ch) * height * width;
    double channel_total = 0.0;
    int positions = 0;
    for (int y = 0; y + kWin <= height; ++y)
      for (int x = 0; x + kWin <= width; ++x) {
        double mu_x = 0.0, mu_y = 0.0;
        for (int i = 0; i < kWin; ++i)
          for (int j = 0; j < kWin; ++j) {
            const std::size_t idx = base + static_cast<std::size_t>(y + i) * width + (x + j);
            mu_x += kernel[i][j] * a[idx];
            mu_y += kernel[i][j] * b[idx];
          }
        double var_x = 0.0, var_y = 0.0, cov = 0.0;
        for (int i = 0; i < kWin; ++i)
          for (int j = 0; j < kWin; ++j) {
            const std::size_t idx = base + static_cast<std::size_t>(y + i) * width + (x + j);
            var_x += kernel[i][j] * (a[idx] - mu_x) * (a[idx] - mu_x);
            var_y += kernel[i][j] * (b[idx] - mu_y) * (b[idx] - mu_y);
            cov += kernel[i][j] * (a[idx] - mu_x) * (b[idx] - mu_y);
          }
        channel_total += ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
                         ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
        ++positions;
      }
    total += channel_total / positions;
  }
  return total / channels;
}

// Exact probability-flow solution for a single-Gaussian RF field: the flow
// preserves the marginals N((1-t) mu, s(t)^2), s(t)^2 = (1-t)^2 sigma^2 + t^2,
// so z(t1) = m(t1) + s(t1)/s(t0) * (z(t0) - m(t0)) per element.
inline double rf_exact_flow_scalar(double z_start, double t_start, double t_end, double mu,
                                   double sigma) {
  const auto spread = [&](double t) {
    return std::sqrt((1.0 - t) * (1.0 - t) * sigma * sigma + t * t);
  };
  const auto mean_path = [&](double t) { return (1.0 - t) * mu; };
  return mean_path(t_end) + spread(t_end) / spread(t_start) * (z_start - mean_path(t_start));
}

}  // namespace oracles
