#pragma once

#include "mguard/nn/types.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace mguard {

/// Seeded generator with a draw sequence that is identical across runs and
/// standard libraries: the engine is mt19937_64 (fully specified by the
/// standard) and the distributions below are implemented here rather than
/// taken from <random>, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// FNV-1a over the bytes of `text`, then mixed with `salt`.
std::uint64_t hash_seed(std::string_view text, std::uint64_t salt);

template <typename Scalar>
Matrix<Scalar> sample_gaussian(Rng& rng, Scalar mean, Scalar stddev, Index rows, Index cols = 1);

template <typename Scalar>
Matrix<Scalar> sample_uniform(Rng& rng, Scalar lo, Scalar hi, Index rows, Index cols = 1);

/// Fisher-Yates with Rng::below, so the permutation is portable.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace mguard
