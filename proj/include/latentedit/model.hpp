#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <string>

#include "latentedit/grid.hpp"

namespace latentedit {

/// Opaque label selecting which data distribution a denoiser models.
/// "source" and "target" are the conventional labels; any label is allowed.
struct ConditionId {
  std::string label;

  friend bool operator==(const ConditionId&, const ConditionId&) = default;
  friend auto operator<=>(const ConditionId&, const ConditionId&) = default;
};

/// Noise predictor (DDIM transitions) and velocity predictor (RF
/// transitions) behind one interface. Implementations must be deterministic
/// in (z, t, condition), return the input shape, and be safe for concurrent
/// read-only evaluation. Every prediction bumps the atomic evaluation
/// counter used for NFE accounting.
class DenoiserModel {
 public:
  virtual ~DenoiserModel() = default;

  Grid predict_noise(const Grid& z, int t, const ConditionId& condition) const {
    evals_.fetch_add(1, std::memory_order_relaxed);
    return do_predict_noise(z, t, condition);
  }

  Grid predict_velocity(const Grid& z, double t, const ConditionId& condition) const {
    evals_.fetch_add(1, std::memory_order_relaxed);
    return do_predict_velocity(z, t, condition);
  }

  /// Total predictor evaluations so far (the NFE count).
  std::int64_t evaluations() const noexcept {
    return evals_.load(std::memory_order_relaxed);
  }

 private:
  virtual Grid do_predict_noise(const Grid& z, int t, const ConditionId& condition) const = 0;
  virtual Grid do_predict_velocity(const Grid& z, double t, const ConditionId& condition) const = 0;

  mutable std::atomic<std::int64_t> evals_{0};
};

}  // namespace latentedit
