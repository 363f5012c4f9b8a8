#ifndef LCM_RNG_HPP
#define LCM_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lcm {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from a master seed and a path of indices, e.g.
/// derive_seed(master, {cell, replication}). Order of keys matters; equal
/// inputs always give equal outputs, independent of call order or thread.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> keys);

/// Seeded 64-bit generator (mt19937_64 engine). The conversions to real and
/// bounded integer values are done here rather than through <random>
/// distributions so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi]. Returns lo exactly when lo == hi.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Lemire-style rejection keeps it unbiased.
  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lcm

#endif  // LCM_RNG_HPP
