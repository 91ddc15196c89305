#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace impartial {

/// SplitMix64 finalizer. Used for every seed derivation in the harness.
std::uint64_t mix64(std::uint64_t x);

/// Seed for task (a, b) under `master`: master XOR mix64(mix64(a) + b).
/// Repetition r and fold f of an experiment use derive_seed(master, r, f).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

/// Portable generator: std::mt19937_64 plus distribution code written here, so
/// sequences do not depend on the standard library's distribution objects.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), rejection sampled. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal (Marsaglia polar method).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// 0..n-1 in random order.
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace impartial
