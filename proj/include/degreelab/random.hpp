#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace degreelab {

/// Stable 64-bit FNV-1a hash of a component tag.
std::uint64_t fnv1a64(std::string_view text);

/// Per-component seed: splitmix64(seed + fnv1a64(tag)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

/// Seeded random stream. The engine is std::mt19937_64 (output sequence fixed
/// by the standard); conversions to reals are done here so that streams are
/// bit-reproducible across standard library implementations.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}
  SeededStream(std::uint64_t seed, std::string_view tag) : engine_(derive_seed(seed, tag)) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace degreelab
