#include "mguard/model/config.hpp"

#include "mguard/error.hpp"

#include <string>

namespace mguard {

void ModelConfig::validate() const {
  if (latent_dim < 1) throw ConfigError("model.latent_dim must be positive");
  if (window_length < 1) throw ConfigError("model.window_length must be positive");
  if (discriminator_hidden < 1) throw ConfigError("model.discriminator_hidden must be positive");
  if (generator_hidden.empty()) throw ConfigError("model.generator_hidden needs at least one layer");
  for (int h : generator_hidden) {
    if (h < 1) throw ConfigError("model.generator_hidden sizes must be positive, got " + std::to_string(h));
  }
}

namespace {

std::int64_t lstm_count(std::int64_t input, std::int64_t hidden) { return 4 * hidden * (input + hidden + 1); }

}  // namespace

std::int64_t generator_parameter_count(const ModelConfig& config) {
  std::int64_t total = 0;
  std::int64_t input = config.latent_dim;
  for (int h : config.generator_hidden) {
    total += lstm_count(input, h);
    input = h;
  }
  return total + input + 1;
}

std::int64_t discriminator_parameter_count(const ModelConfig& config) {
  return lstm_count(1, config.discriminator_hidden) + config.discriminator_hidden + 1;
}

}  // namespace mguard
