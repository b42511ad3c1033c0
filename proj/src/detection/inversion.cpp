#include "mguard/detection/inversion.hpp"

#include "mguard/error.hpp"
#include "mguard/nn/adam.hpp"
#include "mguard/nn/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace mguard {

void InversionConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("detect.lambda must lie in [0, 1]");
  if (steps < 1) throw ConfigError("detect.steps must be >= 1");
  if (restarts < 1) throw ConfigError("detect.restarts must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("detect.learning_rate must be > 0");
  if (!(latent_std >= 0.0)) throw ConfigError("detect.latent_std must be >= 0");
}

std::uint64_t window_seed(const std::string& building_id, std::uint64_t start_index, std::uint64_t seed) {
  return hash_seed(building_id, mix_seed(seed, start_index));
}

int worker_threads_from_env() {
  const char* value = std::getenv("MGUARD_THREADS");
  if (value == nullptr || *value == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(value, &end, 10);
  if (*end != '\0' || n < 0) throw ConfigError(std::string("MGUARD_THREADS must be a non-negative integer, got '") + value + "'");
  return n == 0 ? 1 : static_cast<int>(n);
}

namespace {

struct Terms {
  Vector<double> residual;
  Vector<double> feature;
};

// Per-column L1 of feature maps laid out [H, T*B] (column t*B + j).
Vector<double> feature_distance(const MatrixF& a, const MatrixF& b, Index batch) {
  const Eigen::RowVectorXd per_step = (a - b).cast<double>().cwiseAbs().colwise().sum();
  return Eigen::Map<const Eigen::MatrixXd>(per_step.data(), batch, per_step.size() / batch).rowwise().sum();
}

}  // namespace

LatentEvaluation evaluate_latents(const Generator<float>& generator, const Discriminator<float>& discriminator,
                                  const Eigen::Ref<const VectorF>& x, const Eigen::Ref<const MatrixF>& z,
                                  double lambda) {
  const Index K = z.cols();
  expect_dim("window length", generator.window_length, x.size());
  const MatrixF xs = x.replicate(1, K);
  const MatrixF g = generate<float>(generator, z);
  const auto fx = discriminate<float>(discriminator, xs);
  const auto fg = discriminate<float>(discriminator, g);
  LatentEvaluation e;
  e.residual = (g - xs).cast<double>().cwiseAbs().colwise().sum().transpose();
  e.feature = feature_distance(fg.features, fx.features, K);
  e.score = (1.0 - lambda) * e.residual + lambda * e.feature;
  return e;
}

BatchInversion invert_batch(const Generator<float>& generator, const Discriminator<float>& discriminator,
                            const Eigen::Ref<const MatrixF>& x, const Eigen::Ref<const MatrixF>& z0,
                            const InversionConfig& config) {
  config.validate();
  const Index B = x.cols();
  expect_dim("window length", generator.window_length, x.rows());
  expect_dim("latent rows", generator.latent_dim(), z0.rows());
  expect_dim("latent columns", B, z0.cols());
  const double lambda = config.lambda;
  const auto w_res = static_cast<float>(1.0 - lambda);
  const auto w_feat = static_cast<float>(lambda);

  const MatrixF fx = discriminate<float>(discriminator, x).features;
  const AdamConfig adam{config.learning_rate, config.beta1, config.beta2, config.epsilon};
  AdamState<float> state;
  MatrixF z = z0;

  BatchInversion best;
  best.z_star = z0;
  best.residual = Vector<double>::Constant(B, std::numeric_limits<double>::infinity());
  best.feature = best.residual;
  best.score = best.residual;
  best.finite.assign(static_cast<std::size_t>(B), true);

  GeneratorCache<float> cache;
  for (int k = 0; k <= config.steps; ++k) {
    const MatrixF g = generate<float>(generator, z, &cache);
    auto fg = discriminate<float>(discriminator, g, true);
    const Vector<double> residual = (g - x).cast<double>().cwiseAbs().colwise().sum().transpose();
    const Vector<double> feature = feature_distance(fg.features, fx, B);
    for (Index j = 0; j < B; ++j) {
      const double s = (1.0 - lambda) * residual[j] + lambda * feature[j];
      if (!std::isfinite(s)) {
        best.finite[static_cast<std::size_t>(j)] = false;
      } else if (s < best.score[j]) {
        best.score[j] = s;
        best.residual[j] = residual[j];
        best.feature[j] = feature[j];
        best.z_star.col(j) = z.col(j);
      }
    }
    if (k == config.steps) break;

    // Subgradient of the objective w.r.t. z, models frozen.
    const MatrixF grad_features = w_feat * (fg.features - fx).cwiseSign();
    const auto through_d =
        discriminator_backward<float>(discriminator, fg, MatrixF::Zero(1, B), grad_features, false);
    const MatrixF grad_g = w_res * (g - x).cwiseSign() + through_d.input;
    const auto grads = generator_backward<float>(generator, cache, grad_g, false);
    adam_step<float>(adam, state, z, grads.latent);
  }
  return best;
}

namespace {

struct ChunkJob {
  std::vector<std::size_t> members;  // indices into the input span
};

MatrixF initial_latents(const Generator<float>& generator, std::span<const Window> windows,
                        std::span<const std::size_t> members, const InversionConfig& config, std::uint64_t salt) {
  MatrixF z(generator.latent_dim(), static_cast<Index>(members.size()));
  for (std::size_t j = 0; j < members.size(); ++j) {
    const auto& w = windows[members[j]];
    Rng rng(mix_seed(window_seed(w.building_id, w.start_index, config.seed), salt));
    z.col(static_cast<Index>(j)) =
        sample_gaussian<float>(rng, 0.f, static_cast<float>(config.latent_std), generator.latent_dim());
  }
  return z;
}

MatrixF gather(std::span<const Window> windows, std::span<const std::size_t> members, Index length) {
  MatrixF x(length, static_cast<Index>(members.size()));
  for (std::size_t j = 0; j < members.size(); ++j) {
    expect_dim("window length", length, windows[members[j]].values.size());
    x.col(static_cast<Index>(j)) = windows[members[j]].values;
  }
  return x;
}

constexpr std::uint64_t kRetrySalt = 0x7265747279;  // "retry"

void score_chunk(const Generator<float>& generator, const Discriminator<float>& discriminator,
                 std::span<const Window> windows, const ChunkJob& job, const InversionConfig& config,
                 std::vector<ScoredWindow>& out) {
  const MatrixF x = gather(windows, job.members, generator.window_length);
  for (std::size_t j = 0; j < job.members.size(); ++j) {
    auto& s = out[job.members[j]];
    const auto& w = windows[job.members[j]];
    s.building_id = w.building_id;
    s.start_index = w.start_index;
    s.label = w.label;
    s.score = std::numeric_limits<double>::infinity();
  }
  auto merge = [&](const BatchInversion& inv, std::span<const std::size_t> members) {
    for (std::size_t j = 0; j < members.size(); ++j) {
      auto& s = out[members[j]];
      const auto c = static_cast<Index>(j);
      if (inv.score[c] < s.score) {
        s.score = inv.score[c];
        s.residual = inv.residual[c];
        s.feature = inv.feature[c];
        s.z_star = inv.z_star.col(c);
      }
    }
  };

  for (int r = 0; r < config.restarts; ++r) {
    const auto salt = static_cast<std::uint64_t>(r);
    auto inv = invert_batch(generator, discriminator, x, initial_latents(generator, windows, job.members, config, salt),
                            config);
    std::vector<std::size_t> failed;
    for (std::size_t j = 0; j < job.members.size(); ++j)
      if (!inv.finite[j]) failed.push_back(job.members[j]);
    merge(inv, job.members);
    if (failed.empty()) continue;

    // One retry from a fresh seed, then give up.
    auto retry = invert_batch(generator, discriminator, gather(windows, failed, generator.window_length),
                              initial_latents(generator, windows, failed, config, mix_seed(salt, kRetrySalt)), config);
    for (std::size_t j = 0; j < failed.size(); ++j) {
      if (!retry.finite[j]) {
        const auto& w = windows[failed[j]];
        throw NumericError("non-finite inversion objective for window " + w.building_id + "@" +
                           std::to_string(w.start_index) + " after a restart");
      }
    }
    merge(retry, failed);
  }
}

}  // namespace

std::vector<ScoredWindow> score_batch(const Generator<float>& generator, const Discriminator<float>& discriminator,
                                      std::span<const Window> windows, const InversionConfig& config) {
  config.validate();
  std::vector<ScoredWindow> out(windows.size());
  if (windows.empty()) return out;

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (windows[a] < windows[b]) return true;
    if (windows[b] < windows[a]) return false;
    // Identical keys: fall back to content so the order stays canonical.
    const auto& va = windows[a].values;
    const auto& vb = windows[b].values;
    return std::lexicographical_compare(va.data(), va.data() + va.size(), vb.data(), vb.data() + vb.size());
  });
  std::vector<ChunkJob> jobs;
  for (std::size_t i = 0; i < order.size(); i += kInversionChunk) {
    const auto end = std::min(order.size(), i + kInversionChunk);
    jobs.push_back({std::vector<std::size_t>(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(end))});
  }

  const int threads = std::min<int>(config.threads >= 0 ? std::max(config.threads, 1) : worker_threads_from_env(),
                                    static_cast<int>(jobs.size()));
  if (threads <= 1) {
    for (const auto& job : jobs) score_chunk(generator, discriminator, windows, job, config, out);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
        try {
          score_chunk(generator, discriminator, windows, jobs[k], config, out);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = jobs.size();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

ScoredWindow invert(const Generator<float>& generator, const Discriminator<float>& discriminator,
                    const Window& window, const InversionConfig& config) {
  return score_batch(generator, discriminator, std::span(&window, 1), config).front();
}

}  // namespace mguard
