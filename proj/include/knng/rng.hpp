#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace knng {

// Child-seed offsets. One master seed per run; every randomized stage draws
// from its own derived stream so stages stay independent and reproducible.
inline constexpr std::uint64_t kFoldSeedOffset = 1;
inline constexpr std::uint64_t kLevelSeedOffset = 2;
inline constexpr std::uint64_t kSigmaSeedOffset = 3;
inline constexpr std::uint64_t kDataSeedOffset = 4;
inline constexpr std::uint64_t kQuerySeedOffset = 5;

// mt19937_64 plus hand-rolled draws. The engine itself is pinned by the
// standard, but std:: distributions are implementation-defined, which would
// break bit-identical model files across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound), bound >= 1, exact via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal, Box-Muller with the second value cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace knng
