#include "mguard/training/trainer.hpp"

#include "mguard/binary_io.hpp"
#include "mguard/error.hpp"
#include "mguard/nn/losses.hpp"
#include "mguard/nn/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace mguard {

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (batch_size < 2 || batch_size % 2 != 0) throw ConfigError("train.batch_size must be even and >= 2");
  if (!(latent_std >= 0.0)) throw ConfigError("train.latent_std must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  if (!(adam.alpha >= 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("train.adam: need alpha >= 0 and betas in [0, 1)");
  if (!(step.real_label > 0.5 && step.real_label <= 1.0)) throw ConfigError("train.real_label must be in (0.5, 1]");
  if (!(step.instance_noise >= 0.0)) throw ConfigError("train.instance_noise must be >= 0");
}

TrainState TrainState::fresh(const ModelConfig& model, const TrainConfig& config) {
  model.validate();
  config.validate();
  Rng rng(mix_seed(config.seed, 0x696e6974 /* "init" */));
  TrainState state;
  state.generator = Generator<float>::initialized(model, rng);
  state.discriminator = Discriminator<float>::initialized(model, rng);
  state.generator_optimizer = AdamOptimizer<float>(config.adam);
  state.discriminator_optimizer = AdamOptimizer<float>(config.adam);
  return state;
}

namespace {

template <typename Model>
bool all_finite(Model& model) {
  for (const auto& p : model.parameters())
    if (!p.map().allFinite()) return false;
  return true;
}

}  // namespace

StepResult train_step(Generator<float>& generator, Discriminator<float>& discriminator,
                      const Eigen::Ref<const MatrixF>& real, Rng& rng, AdamOptimizer<float>& generator_optimizer,
                      AdamOptimizer<float>& discriminator_optimizer, double latent_std,
                      const StepOptions& options) {
  const Index n = real.cols();
  const Index T = generator.window_length;
  expect_dim("real batch window length", T, real.rows());
  if (n == 0) throw DataError("train_step: empty real batch");
  const auto latent = generator.latent_dim();
  const auto std_f = static_cast<float>(latent_std);
  StepResult result;

  // Discriminator: real labeled 1, freshly generated labeled 0.
  {
    const MatrixF z = sample_gaussian<float>(rng, 0.f, std_f, latent, n);
    MatrixF batch(T, 2 * n);
    batch.leftCols(n) = real;
    batch.rightCols(n) = generate<float>(generator, z);
    if (options.instance_noise > 0.0)
      batch += sample_gaussian<float>(rng, 0.f, static_cast<float>(options.instance_noise), T, 2 * n);
    MatrixF targets(1, 2 * n);
    targets.leftCols(n).setConstant(static_cast<float>(options.real_label));
    targets.rightCols(n).setZero();

    auto fwd = discriminate<float>(discriminator, batch, true);
    result.d_loss = bce_loss<float>(fwd.scores, targets).value;
    const auto correct = (fwd.scores.leftCols(n).array() > 0.5f).count() +
                         (fwd.scores.rightCols(n).array() < 0.5f).count();
    result.d_accuracy = static_cast<double>(correct) / static_cast<double>(2 * n);
    if (!std::isfinite(result.d_loss)) throw NumericError("non-finite discriminator loss");

    auto grads = discriminator_backward<float>(discriminator, fwd, bce_logit_grad<float>(fwd.scores, targets), MatrixF());
    discriminator_optimizer.step(discriminator.parameters(), grads.params.parameters());
    if (!all_finite(discriminator)) throw NumericError("non-finite discriminator parameter after update");
  }

  // Generator: non-saturating objective -log D(G(z)) on new samples.
  {
    const MatrixF z = sample_gaussian<float>(rng, 0.f, std_f, latent, n);
    GeneratorCache<float> cache;
    MatrixF fake = generate<float>(generator, z, &cache);
    if (options.instance_noise > 0.0)
      fake += sample_gaussian<float>(rng, 0.f, static_cast<float>(options.instance_noise), T, n);
    auto fwd = discriminate<float>(discriminator, fake, true);
    const MatrixF ones = MatrixF::Ones(1, n);
    result.g_loss = bce_loss<float>(fwd.scores, ones).value;
    if (!std::isfinite(result.g_loss)) throw NumericError("non-finite generator loss");

    auto d_grads = discriminator_backward<float>(discriminator, fwd, bce_logit_grad<float>(fwd.scores, ones), MatrixF(), false);
    auto g_grads = generator_backward<float>(generator, cache, d_grads.input);
    generator_optimizer.step(generator.parameters(), g_grads.params.parameters());
    if (!all_finite(generator)) throw NumericError("non-finite generator parameter after update");
  }
  return result;
}

std::filesystem::path epoch_checkpoint_path(const std::filesystem::path& dir, int epoch) {
  char name[32];
  std::snprintf(name, sizeof name, "epoch_%03d.glsm", epoch);
  return dir / name;
}

std::filesystem::path latest_checkpoint_path(const std::filesystem::path& dir) { return dir / "latest.glsm"; }

namespace {

// Counters are stored as four 16-bit limbs so float32 holds them exactly.
Tensor counter_tensor(std::uint64_t value) {
  Tensor t{{4}, {}};
  for (int k = 0; k < 4; ++k) t.data.push_back(static_cast<float>((value >> (16 * k)) & 0xffff));
  return t;
}

std::uint64_t counter_value(const Tensor& t) {
  if (t.data.size() != 4) throw FormatError("malformed counter tensor");
  std::uint64_t value = 0;
  for (int k = 0; k < 4; ++k) value |= static_cast<std::uint64_t>(t.data[static_cast<std::size_t>(k)]) << (16 * k);
  return value;
}

void put_moments(ModelCheckpoint& ckpt, const std::string& prefix, const std::vector<ParamRef<float>>& params,
                 const AdamOptimizer<float>& optimizer) {
  const auto states = optimizer.states();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const bool have = i < states.size() && states[i].m.size() > 0;
    const MatrixF zero = MatrixF::Zero(params[i].rows, params[i].cols);
    ckpt.put(prefix + params[i].name + ".m", Tensor::from_matrix(have ? states[i].m : zero));
    ckpt.put(prefix + params[i].name + ".v", Tensor::from_matrix(have ? states[i].v : zero));
  }
}

void restore_moments(const ModelCheckpoint& ckpt, const std::string& prefix,
                     const std::vector<ParamRef<float>>& params, AdamOptimizer<float>& optimizer,
                     std::int64_t steps) {
  auto& states = optimizer.mutable_states();
  states.assign(params.size(), {});
  if (steps == 0) return;
  for (std::size_t i = 0; i < params.size(); ++i) {
    states[i].step_count = steps;
    states[i].m = ckpt.at(prefix + params[i].name + ".m").to_matrix();
    states[i].v = ckpt.at(prefix + params[i].name + ".v").to_matrix();
    expect_dim("optimizer moment rows", params[i].rows, states[i].m.rows());
    expect_dim("optimizer moment cols", params[i].cols, states[i].m.cols());
  }
}

}  // namespace

ModelCheckpoint make_training_checkpoint(TrainState& state, const TrainConfig& config, const EpochSummary* summary) {
  CheckpointConfig cc;
  cc.latent_dim = static_cast<std::uint32_t>(state.generator.latent_dim());
  cc.window_length = static_cast<std::uint32_t>(state.generator.window_length);
  cc.clip_c = config.clip_c;
  cc.seed = config.seed;
  auto ckpt = make_checkpoint(state.generator, state.discriminator, cc);
  ckpt.put("meta.epoch", counter_tensor(static_cast<std::uint64_t>(state.epochs_done)));
  ckpt.put("meta.iterations", counter_tensor(state.iterations_done));
  if (summary != nullptr) {
    ckpt.put("meta.epoch_losses", Tensor{{3},
                                         {static_cast<float>(summary->mean_d_loss),
                                          static_cast<float>(summary->mean_g_loss),
                                          static_cast<float>(summary->mean_d_accuracy)}});
  }
  put_moments(ckpt, "adam.", state.generator.parameters(), state.generator_optimizer);
  put_moments(ckpt, "adam.", state.discriminator.parameters(), state.discriminator_optimizer);
  return ckpt;
}

TrainState resume_training_state(const ModelCheckpoint& checkpoint, const ModelConfig& model,
                                 const TrainConfig& config) {
  check_compatible(checkpoint.config, model);
  TrainState state;
  state.generator = restore_generator(checkpoint);
  state.discriminator = restore_discriminator(checkpoint);
  const auto found = model_config_of(checkpoint);
  if (found.generator_hidden != model.generator_hidden || found.discriminator_hidden != model.discriminator_hidden)
    throw ConfigError("checkpoint hidden sizes do not match the configured model");
  const Tensor* epoch = checkpoint.find("meta.epoch");
  const Tensor* iterations = checkpoint.find("meta.iterations");
  if (epoch == nullptr || iterations == nullptr)
    throw ConfigError("checkpoint carries no training state; cannot resume from it");
  state.epochs_done = static_cast<int>(counter_value(*epoch));
  state.iterations_done = counter_value(*iterations);
  state.generator_optimizer = AdamOptimizer<float>(config.adam);
  state.discriminator_optimizer = AdamOptimizer<float>(config.adam);
  const auto steps = static_cast<std::int64_t>(state.iterations_done);
  restore_moments(checkpoint, "adam.", state.generator.parameters(), state.generator_optimizer, steps);
  restore_moments(checkpoint, "adam.", state.discriminator.parameters(), state.discriminator_optimizer, steps);
  return state;
}

namespace {

std::string describe_batch(std::span<const Window> windows, std::span<const std::size_t> rows,
                           const MatrixF& batch) {
  std::ostringstream out;
  out << "offending real batch (" << rows.size() << " windows):\n";
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& w = windows[rows[j]];
    const auto col = batch.col(static_cast<Index>(j));
    out << "  " << w.building_id << "@" << w.start_index << " min=" << col.minCoeff() << " max=" << col.maxCoeff()
        << " finite=" << (col.allFinite() ? "yes" : "no") << "\n";
  }
  return out.str();
}

}  // namespace

TrainLog train(TrainState& state, std::span<const Window> train_windows, const TrainConfig& config) {
  config.validate();
  TrainLog log;
  if (state.epochs_done >= config.epochs) return log;
  if (train_windows.empty()) throw DataError("training set is empty");
  const Index T = state.generator.window_length;
  for (const auto& w : train_windows) {
    if (w.label != WindowLabel::normal)
      throw DataError("training window " + w.building_id + "@" + std::to_string(w.start_index) + " is " +
                      to_string(w.label) + "; only normal windows may be trained on");
    expect_dim("training window length", T, w.values.size());
  }

  const std::size_t n = train_windows.size();
  const auto half = static_cast<std::size_t>(config.half_batch());
  std::size_t steps = (n + half - 1) / half;
  if (config.max_steps_per_epoch > 0) steps = std::min(steps, config.max_steps_per_epoch);

  std::vector<std::size_t> order(n);
  std::vector<std::size_t> rows(half);
  MatrixF batch(T, static_cast<Index>(half));
  for (int epoch = state.epochs_done + 1; epoch <= config.epochs; ++epoch) {
    // Every epoch draws from its own stream so a resumed run replays exactly.
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span(order), rng);

    EpochSummary summary;
    summary.epoch = epoch;
    for (std::size_t s = 0; s < steps; ++s) {
      for (std::size_t j = 0; j < half; ++j) {
        rows[j] = order[(s * half + j) % n];
        batch.col(static_cast<Index>(j)) = train_windows[rows[j]].values;
      }
      StepResult r;
      try {
        r = train_step(state.generator, state.discriminator, batch, rng, state.generator_optimizer,
                       state.discriminator_optimizer, config.latent_std, config.step);
      } catch (const NumericError& e) {
        const std::string dump = describe_batch(train_windows, rows, batch);
        if (!config.checkpoint_dir.empty()) write_text_file(config.checkpoint_dir / "numeric_failure.txt", dump);
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(s + 1) + "\n" + dump);
      }
      ++state.iterations_done;
      log.iterations.push_back({state.iterations_done, epoch, r});
      summary.mean_d_loss += r.d_loss;
      summary.mean_g_loss += r.g_loss;
      summary.mean_d_accuracy += r.d_accuracy;
      summary.last_d_accuracy = r.d_accuracy;
    }
    summary.steps = steps;
    summary.mean_d_loss /= static_cast<double>(steps);
    summary.mean_g_loss /= static_cast<double>(steps);
    summary.mean_d_accuracy /= static_cast<double>(steps);
    log.epochs.push_back(summary);
    state.epochs_done = epoch;

    const bool last = epoch == config.epochs;
    const bool periodic = config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0;
    if (!config.checkpoint_dir.empty() && (last || periodic)) {
      const auto ckpt = make_training_checkpoint(state, config, &summary);
      save_checkpoint(epoch_checkpoint_path(config.checkpoint_dir, epoch), ckpt);
      save_checkpoint(latest_checkpoint_path(config.checkpoint_dir), ckpt);
    }
  }
  return log;
}

std::string train_log_csv(const TrainLog& log) {
  std::string out = "iteration,epoch,d_loss,g_loss,d_accuracy\n";
  char line[160];
  for (const auto& it : log.iterations) {
    std::snprintf(line, sizeof line, "%llu,%d,%.9g,%.9g,%.9g\n", static_cast<unsigned long long>(it.iteration),
                  it.epoch, it.step.d_loss, it.step.g_loss, it.step.d_accuracy);
    out += line;
  }
  return out;
}

TrainLog parse_train_log_csv(const std::string& text) {
  TrainLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    IterationRecord r;
    unsigned long long iteration = 0;
    if (std::sscanf(line.c_str(), "%llu,%d,%lf,%lf,%lf", &iteration, &r.epoch, &r.step.d_loss, &r.step.g_loss,
                    &r.step.d_accuracy) != 5)
      throw DataError("train log line " + std::to_string(line_no) + ": malformed row");
    r.iteration = iteration;
    log.iterations.push_back(r);
  }
  // Rebuild epoch summaries from the rows.
  for (const auto& r : log.iterations) {
    if (log.epochs.empty() || log.epochs.back().epoch != r.epoch) log.epochs.push_back({.epoch = r.epoch});
    auto& e = log.epochs.back();
    ++e.steps;
    e.mean_d_loss += r.step.d_loss;
    e.mean_g_loss += r.step.g_loss;
    e.mean_d_accuracy += r.step.d_accuracy;
    e.last_d_accuracy = r.step.d_accuracy;
  }
  for (auto& e : log.epochs) {
    const auto k = static_cast<double>(e.steps);
    e.mean_d_loss /= k;
    e.mean_g_loss /= k;
    e.mean_d_accuracy /= k;
  }
  return log;
}

StabilityReport stability_report(const TrainLog& log, AccuracyBand band) {
  StabilityReport report;
  report.band = band;
  if (log.iterations.empty()) return report;
  report.d_loss_min = report.d_loss_max = log.iterations.front().step.d_loss;
  for (const auto& it : log.iterations) {
    report.d_loss_min = std::min(report.d_loss_min, it.step.d_loss);
    report.d_loss_max = std::max(report.d_loss_max, it.step.d_loss);
  }
  const auto m = static_cast<double>(log.epochs.size());
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& e : log.epochs) {
      sx += e.epoch;
      sy += e.mean_g_loss;
      sxx += double(e.epoch) * e.epoch;
      sxy += e.epoch * e.mean_g_loss;
    }
    const double denom = m * sxx - sx * sx;
    if (denom != 0.0) report.g_loss_trend = (m * sxy - sx * sy) / denom;
  }
  for (const auto& e : log.epochs)
    if (e.mean_d_accuracy < band.lower || e.mean_d_accuracy > band.upper) report.d_accuracy_band_violations.push_back(e.epoch);
  report.final_d_accuracy = log.epochs.back().mean_d_accuracy;
  report.final_in_band = report.final_d_accuracy >= band.lower && report.final_d_accuracy <= band.upper;
  return report;
}

std::string StabilityReport::to_json() const {
  nlohmann::ordered_json j;
  j["accuracy_band"] = {band.lower, band.upper};
  j["g_loss_trend"] = g_loss_trend;
  j["d_loss_bounds"] = {d_loss_min, d_loss_max};
  j["d_accuracy_band_violations"] = d_accuracy_band_violations;
  j["final_d_accuracy"] = final_d_accuracy;
  j["final_in_band"] = final_in_band;
  return j.dump(2) + "\n";
}

}  // namespace mguard
