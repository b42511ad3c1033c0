#pragma once

#include "mguard/model/config.hpp"
#include "mguard/model/discriminator.hpp"
#include "mguard/model/generator.hpp"
#include "mguard/nn/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mguard {

inline constexpr char kCheckpointMagic[4] = {'G', 'L', 'S', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointConfig {
  std::uint32_t latent_dim = 100;
  std::uint32_t window_length = 60;
  float clip_c = 3.5f;
  std::uint64_t seed = 0;

  friend bool operator==(const CheckpointConfig&, const CheckpointConfig&) = default;
};

/// Named tensors in file order plus the fixed config block.
///
/// File layout, little-endian:
///   magic "GLSM" | version u32 | latent_dim u32 | window_length u32 |
///   clip_c f32 | seed u64 | tensor count u32 |
///   per tensor: name length u16, UTF-8 name, rank u8, dims u32 x rank,
///               f32 data (row-major)
struct ModelCheckpoint {
  CheckpointConfig config;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
  const Tensor& at(const std::string& name) const;  // throws FormatError
  void put(const std::string& name, Tensor tensor);  // replaces or appends

  friend bool operator==(const ModelCheckpoint&, const ModelCheckpoint&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& checkpoint);
ModelCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& checkpoint);

/// Throws FormatError on bad magic, unsupported version or truncation.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Same, and additionally throws ConfigError when latent_dim or
/// window_length disagree with `expected`.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

void check_compatible(const CheckpointConfig& found, const ModelConfig& expected);

/// Packs both networks' parameters under their block names.
ModelCheckpoint make_checkpoint(Generator<float>& generator, Discriminator<float>& discriminator,
                                const CheckpointConfig& config);

/// Rebuilds networks from the tensors; hidden sizes are read from the
/// tensor shapes.
Generator<float> restore_generator(const ModelCheckpoint& checkpoint);
Discriminator<float> restore_discriminator(const ModelCheckpoint& checkpoint);

/// Model dimensions recovered from a checkpoint's tensors.
ModelConfig model_config_of(const ModelCheckpoint& checkpoint);

}  // namespace mguard
