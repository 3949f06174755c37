#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace rcert {

namespace detail {

// SplitMix64 finalizer; also used as the stream generator itself.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic counter-friendly random stream. All distributions are
// implemented on top of raw 64-bit draws so results are identical across
// platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; second deviate is cached
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Derives an independent stream seed from a root seed, a stage label and a
  // counter. Stage labels keep pipeline phases re-runnable in isolation; the
  // counter makes per-sample streams independent of scheduling.
  static std::uint64_t derive(std::uint64_t root, std::string_view label,
                              std::uint64_t index) {
    std::uint64_t h = detail::mix64(root ^ 0xA0761D6478BD642FULL);
    for (char c : label) {
      h = detail::mix64(h ^ static_cast<std::uint64_t>(
                                static_cast<unsigned char>(c)));
    }
    return detail::mix64(h ^ index);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rcert
