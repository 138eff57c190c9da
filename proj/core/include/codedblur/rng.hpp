#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace codedblur {

/// Deterministic random source. Gaussian samples use an explicit Box-Muller
/// transform instead of std::normal_distribution so a given seed produces the
/// same stream regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal.
  double gaussian();

  /// Uniform integer in [lo, hi] without modulo bias concerns at these scales.
  int uniform_int(int lo, int hi);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a hash; stable across platforms (std::hash makes no such promise).
std::uint64_t fnv1a64(std::string_view s);

/// Order-sensitive seed combiner (splitmix64 finalization of a ^ rotated b).
std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b);

}  // namespace codedblur
