#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace latentedit {

/// Seed of the deterministic sampling stream. Equal seeds reproduce
/// bit-identical streams within a build; the generator and the mapping to
/// doubles are pinned below so independent implementations can reproduce
/// the stream as well.
struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// splitmix64 (Steele, Lea & Flood); used only to expand a seed into
/// generator state.
constexpr std::uint64_t split_mix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// xoshiro256++ (Blackman & Vigna, public domain reference implementation),
/// state seeded from four consecutive splitmix64 outputs.
class Xoshiro256PlusPlus {
 public:
  explicit constexpr Xoshiro256PlusPlus(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = split_mix64(sm);
  }

  constexpr std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in (0, 1]: the top 53 bits of next(), plus one, scaled
  /// by 2^-53. Never zero, so logarithms of it are finite.
  double next_unit() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

/// Standard-normal stream: Box-Muller pairs over xoshiro256++ uniforms,
///   r = sqrt(-2 ln u1),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2),
/// consumed in generation order (cosine branch first).
class GaussianSampler {
 public:
  explicit GaussianSampler(Seed seed) : rng_(seed.value) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.next_unit();
    const double u2 = rng_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  Xoshiro256PlusPlus rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace latentedit
