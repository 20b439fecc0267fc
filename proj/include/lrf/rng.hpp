#pragma once

#include <cstdint>
#include <random>

namespace lrf {

/// Deterministic random source. The engine is mt19937_64 (bit-exact across
/// platforms); all distributions are implemented here instead of using
/// std:: distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (both draws consumed, second discarded).
  double normal();

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Poisson by Knuth's product method; intended for small means (<= ~60).
  int poisson(double mean);

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
};

/// Stable 64-bit hash of a byte string (FNV-1a), for deriving named streams.
std::uint64_t hash64(const char* data, std::size_t len);
std::uint64_t hash64(const std::string& s);

/// splitmix64 finalizer; combines seeds/ids into independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return mix64(base ^ mix64(salt + 0x9e3779b97f4a7c15ULL));
}

}  // namespace lrf
