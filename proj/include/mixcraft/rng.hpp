#ifndef MIXCRAFT_RNG_HPP
#define MIXCRAFT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mixcraft {

/// SplitMix64 finalizer; used to turn (seed, stream name) into independent
/// engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seeded pseudo-random source: MT19937-64 for the raw stream, with uniform
/// and normal variates derived here rather than through <random>
/// distributions, whose outputs differ between standard library vendors.
/// Normals use the Marsaglia polar method.
class SeededGenerator {
 public:
  explicit SeededGenerator(std::uint64_t seed) : engine_(seed) {}

  /// Named substream of a master seed, e.g. substream(seed, "boot").
  static SeededGenerator substream(std::uint64_t seed, std::string_view name) {
    return SeededGenerator(splitmix64(seed ^ fnv1a(name)));
  }

  /// Indexed child stream, e.g. one per bootstrap replicate.
  SeededGenerator child(std::uint64_t index) {
    return SeededGenerator(splitmix64(next_u64() ^ splitmix64(index)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double low, double high) { return low + (high - low) * uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mixcraft

#endif  // MIXCRAFT_RNG_HPP
