#pragma once

#include "mguard/data/windows.hpp"
#include "mguard/model/checkpoint.hpp"
#include "mguard/model/discriminator.hpp"
#include "mguard/model/generator.hpp"
#include "mguard/nn/adam.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mguard {

class Rng;

/// Optional discriminator regularizers; the defaults leave the plain
/// objectives untouched.
struct StepOptions {
  double real_label = 1.0;      // BCE target for real windows in the D update
  double instance_noise = 0.0;  // std of Gaussian noise added to every D input
};

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;  // half real, half generated
  AdamConfig adam;
  double latent_std = 0.1;
  std::uint64_t seed = 0;
  int checkpoint_every = 1;  // 0: only after the final epoch
  std::filesystem::path checkpoint_dir;  // empty: no checkpoint files
  /// Caps steps per epoch (0 = a full pass over the training windows).
  std::size_t max_steps_per_epoch = 0;
  float clip_c = 3.5f;  // recorded in checkpoints
  StepOptions step;

  int half_batch() const { return batch_size / 2; }
  void validate() const;  // ConfigError
};

struct StepResult {
  double d_loss = 0.0;
  double g_loss = 0.0;
  double d_accuracy = 0.0;  // pre-update, over the full batch
};

struct IterationRecord {
  std::uint64_t iteration = 0;  // 1-based, global
  int epoch = 0;                // 1-based
  StepResult step;
};

struct EpochSummary {
  int epoch = 0;
  std::size_t steps = 0;
  double mean_d_loss = 0.0;
  double mean_g_loss = 0.0;
  double mean_d_accuracy = 0.0;
  double last_d_accuracy = 0.0;
};

struct TrainLog {
  std::vector<IterationRecord> iterations;
  std::vector<EpochSummary> epochs;

  bool empty() const { return iterations.empty(); }
};

/// Columns: iteration,epoch,d_loss,g_loss,d_accuracy
std::string train_log_csv(const TrainLog& log);
TrainLog parse_train_log_csv(const std::string& text);

/// Models plus optimizer moments; everything needed to resume exactly.
struct TrainState {
  Generator<float> generator;
  Discriminator<float> discriminator;
  AdamOptimizer<float> generator_optimizer;
  AdamOptimizer<float> discriminator_optimizer;
  int epochs_done = 0;
  std::uint64_t iterations_done = 0;

  static TrainState fresh(const ModelConfig& model, const TrainConfig& config);
};

/// One discriminator update on `real` [T, n] plus n fresh samples, then one
/// generator update on n new samples. Losses are mean BCE; the generator
/// uses the non-saturating objective. Throws NumericError on a non-finite
/// loss or parameter. Noise draws, when enabled, follow the latent draws of
/// each half-step, so the default draw sequence is unaffected.
StepResult train_step(Generator<float>& generator, Discriminator<float>& discriminator,
                      const Eigen::Ref<const MatrixF>& real, Rng& rng, AdamOptimizer<float>& generator_optimizer,
                      AdamOptimizer<float>& discriminator_optimizer, double latent_std = 0.1,
                      const StepOptions& options = {});

/// Runs epochs state.epochs_done + 1 .. config.epochs over `train_windows`,
/// each a seeded shuffled pass of half-batch real windows per step (the
/// last batch wraps around). Throws DataError on an empty set or any
/// window that is not labeled normal.
TrainLog train(TrainState& state, std::span<const Window> train_windows, const TrainConfig& config);

ModelCheckpoint make_training_checkpoint(TrainState& state, const TrainConfig& config, const EpochSummary* summary);

/// Throws ConfigError when the checkpoint's model dimensions differ from
/// `model` or it carries no optimizer state.
TrainState resume_training_state(const ModelCheckpoint& checkpoint, const ModelConfig& model,
                                 const TrainConfig& config);

std::filesystem::path epoch_checkpoint_path(const std::filesystem::path& dir, int epoch);
std::filesystem::path latest_checkpoint_path(const std::filesystem::path& dir);

struct AccuracyBand {
  double lower = 0.5;
  double upper = 0.9;
};

struct StabilityReport {
  AccuracyBand band;
  double g_loss_trend = 0.0;  // least-squares slope of epoch mean L_G per epoch
  double d_loss_min = 0.0;    // over iterations
  double d_loss_max = 0.0;
  std::vector<int> d_accuracy_band_violations;  // epochs whose mean accuracy leaves the band
  double final_d_accuracy = 0.0;
  bool final_in_band = false;

  std::string to_json() const;
};

StabilityReport stability_report(const TrainLog& log, AccuracyBand band = {});

}  // namespace mguard
