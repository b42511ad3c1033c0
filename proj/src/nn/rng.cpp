#include "mguard/nn/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mguard {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Largest multiple of n that fits; draws above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_seed(std::string_view text, std::uint64_t salt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix_seed(h, salt);
}

template <typename Scalar>
Matrix<Scalar> sample_gaussian(Rng& rng, Scalar mean, Scalar stddev, Index rows, Index cols) {
  Matrix<Scalar> out(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Index i = 0; i < out.size(); ++i) {
    out.data()[i] = mean + stddev * static_cast<Scalar>(rng.normal());
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> sample_uniform(Rng& rng, Scalar lo, Scalar hi, Index rows, Index cols) {
  Matrix<Scalar> out(rows, cols);
  for (Index i = 0; i < out.size(); ++i) {
    out.data()[i] = static_cast<Scalar>(rng.uniform(lo, hi));
  }
  return out;
}

template Matrix<float> sample_gaussian<float>(Rng&, float, float, Index, Index);
template Matrix<double> sample_gaussian<double>(Rng&, double, double, Index, Index);
template Matrix<float> sample_uniform<float>(Rng&, float, float, Index, Index);
template Matrix<double> sample_uniform<double>(Rng&, double, double, Index, Index);

}  // namespace mguard
