#pragma once

#include "mguard/data/windows.hpp"
#include "mguard/model/discriminator.hpp"
#include "mguard/model/generator.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mguard {

struct InversionConfig {
  double lambda = 0.1;
  int steps = 300;
  double learning_rate = 1e-2;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int restarts = 1;
  double latent_std = 0.1;
  std::uint64_t seed = 0;
  /// Worker threads for score_batch; -1 reads MGUARD_THREADS (unset or 0
  /// means sequential).
  int threads = -1;

  void validate() const;  // ConfigError
};

/// Windows are inverted together in chunks of this many columns. The chunk
/// composition is fixed by the canonical (building, start) order, so scores
/// do not depend on input order or thread count.
inline constexpr std::size_t kInversionChunk = 32;

struct ScoredWindow {
  std::string building_id;
  std::uint64_t start_index = 0;
  WindowLabel label = WindowLabel::unlabeled;
  VectorF z_star;
  double residual = 0.0;  // R = |x - G(z*)|_1
  double feature = 0.0;   // F = |f_D(x) - f_D(G(z*))|_1
  double score = 0.0;     // S = (1 - lambda) R + lambda F
  std::optional<bool> anomalous;  // set by classify
};

/// Seed of one window's latent initialization.
std::uint64_t window_seed(const std::string& building_id, std::uint64_t start_index, std::uint64_t seed);

/// Objective terms for each column of `z` [latent, K] against the single
/// window `x`, without optimization.
struct LatentEvaluation {
  Vector<double> residual;
  Vector<double> feature;
  Vector<double> score;
};

LatentEvaluation evaluate_latents(const Generator<float>& generator, const Discriminator<float>& discriminator,
                                  const Eigen::Ref<const VectorF>& x, const Eigen::Ref<const MatrixF>& z,
                                  double lambda);

/// Optimizes a latent code per column of `x` [T, B] from `z0` [latent, B]
/// with Adam for config.steps updates. Returns, per column, the best of the
/// steps + 1 visited iterates. Non-finite objectives are reported through
/// `finite` rather than thrown.
struct BatchInversion {
  MatrixF z_star;
  Vector<double> residual;
  Vector<double> feature;
  Vector<double> score;
  std::vector<bool> finite;
};

BatchInversion invert_batch(const Generator<float>& generator, const Discriminator<float>& discriminator,
                            const Eigen::Ref<const MatrixF>& x, const Eigen::Ref<const MatrixF>& z0,
                            const InversionConfig& config);

/// Scores one window (a batch of one).
ScoredWindow invert(const Generator<float>& generator, const Discriminator<float>& discriminator,
                    const Window& window, const InversionConfig& config);

/// Scores every window; output is in input order. A window whose objective
/// turns non-finite is retried once from a fresh seed, then NumericError.
std::vector<ScoredWindow> score_batch(const Generator<float>& generator, const Discriminator<float>& discriminator,
                                      std::span<const Window> windows, const InversionConfig& config);

/// Honors MGUARD_THREADS; 0 or unset means sequential (returns 1).
int worker_threads_from_env();

}  // namespace mguard
