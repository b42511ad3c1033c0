#pragma once

#include "mguard/detection/inversion.hpp"
#include "mguard/model/config.hpp"
#include "mguard/synth/corpus.hpp"
#include "mguard/training/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mguard {

/// Flat "section.key" -> value view of the INI config. Every known key has
/// a default; files and --set overrides may only touch known keys.
class RunConfig {
 public:
  RunConfig();  // all defaults

  /// Merges an INI file (sections match module names). ConfigError on
  /// syntax errors or unknown keys.
  void merge_file(const std::filesystem::path& path);
  void merge_ini(const std::string& text);
  /// "section.key=value".
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  std::uint64_t seed() const { return get_u64("run.seed"); }

  /// Fully resolved config as INI, sections and keys sorted.
  std::string to_ini() const;
  /// FNV-1a of to_ini(), as 16 hex digits.
  std::string fingerprint() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Module configs assembled from a RunConfig. Seeds are derived from
/// run.seed per module.
SynthConfig synth_config(const RunConfig& config);
ModelConfig model_config(const RunConfig& config);
TrainConfig train_config(const RunConfig& config);
InversionConfig inversion_config(const RunConfig& config);

}  // namespace mguard
