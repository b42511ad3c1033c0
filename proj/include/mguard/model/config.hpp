#pragma once

#include <cstdint>
#include <vector>

namespace mguard {

/// Network dimensions. Defaults are the reference configuration.
struct ModelConfig {
  int latent_dim = 100;
  int window_length = 60;
  std::vector<int> generator_hidden{32, 64, 128};
  int discriminator_hidden = 100;

  /// Throws ConfigError on non-positive sizes or an empty generator stack.
  void validate() const;
};

/// Parameter counts of a configuration, computed from the layer formulas.
std::int64_t generator_parameter_count(const ModelConfig& config);
std::int64_t discriminator_parameter_count(const ModelConfig& config);

}  // namespace mguard
