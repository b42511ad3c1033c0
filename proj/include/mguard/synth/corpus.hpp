#pragma once

#include "mguard/data/series.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mguard {

enum class AnomalyKind : std::uint8_t { spike, drop, shift, oscillation };

const char* to_string(AnomalyKind kind);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct ArchetypeSpec {
  bool enabled = true;
  double weight = 1.0;  // relative draw probability
  Range magnitude;      // meaning depends on the kind, see SynthConfig
  Range duration;       // hours, inclusive integer range
  Range period;         // oscillation only, hours
};

/// Base load: level * (1 + daily sinusoid) * weekly factor, plus Gaussian
/// noise with std noise_fraction * level. Anomaly magnitudes for spike,
/// shift and oscillation are in units of the std of the noiseless base
/// profile; drop magnitude is the fraction of load removed.
struct SynthConfig {
  int n_buildings = 50;
  int hours_per_building = 500;
  double anomaly_rate = 0.02;  // fraction of all hours
  std::uint64_t seed = 7;
  std::string start_timestamp = "2016-01-01 00:00:00";

  Range level{50.0, 150.0};
  Range daily_amplitude{0.2, 0.5};  // relative to level
  Range weekly_depth{0.05, 0.2};    // weekend reduction
  double noise_fraction = 0.03;     // noise std relative to level

  ArchetypeSpec spike{true, 1.0, {6.0, 10.0}, {1, 2}, {}};
  ArchetypeSpec drop{true, 1.0, {0.5, 0.8}, {2, 6}, {}};
  ArchetypeSpec shift{true, 1.0, {2.0, 4.0}, {48, 120}, {}};
  ArchetypeSpec oscillation{true, 1.0, {2.0, 4.0}, {6, 12}, {2.0, 4.0}};

  /// Every anomalous hour is pushed to at least this many noise stds from
  /// the base curve, and its noise is clipped to +-1 std, so the observed
  /// deviation is at least min_deviation_noise_sd - 1 noise stds.
  double min_deviation_noise_sd = 4.0;

  const ArchetypeSpec& spec(AnomalyKind kind) const;
  void validate() const;  // ConfigError
};

struct AnomalyEvent {
  std::size_t building = 0;
  AnomalyKind kind = AnomalyKind::spike;
  std::size_t start = 0;
  std::size_t duration = 1;
  double magnitude = 0.0;
  double period = 0.0;
};

struct BuildingProfile {
  std::string building_id;
  double level = 0.0;
  double daily_amplitude = 0.0;
  double daily_phase = 0.0;
  double weekly_depth = 0.0;
  double noise_std = 0.0;

  /// Noiseless load at an absolute hour (hours since 1970-01-01 UTC).
  double base(std::int64_t hour) const;
};

struct SynthCorpus {
  std::int64_t start_hour = 0;
  std::vector<BuildingProfile> profiles;
  std::vector<BuildingSeries> buildings;  // readings rounded to 4 decimals, labels exact
  std::vector<AnomalyEvent> events;
};

/// Draws profiles and a corpus-wide anomaly budget of
/// round(rate * n_buildings * hours) hours, filled exactly with
/// non-overlapping events. Deterministic in the config.
SynthCorpus generate_corpus(const SynthConfig& config);

/// Renders given profiles with explicit events (used by generate_corpus
/// and by tests that place anomalies by hand). Throws ConfigError if an
/// event runs past the series end.
SynthCorpus render_corpus(const SynthConfig& config, std::vector<BuildingProfile> profiles,
                          std::vector<AnomalyEvent> events);

std::vector<BuildingProfile> draw_profiles(const SynthConfig& config);

/// Ingestion schema: building_id,timestamp,meter_reading,anomaly.
std::string corpus_csv(const SynthCorpus& corpus);
void write_corpus_csv(const std::filesystem::path& path, const SynthCorpus& corpus);

/// Population std of the noiseless base profile over the series; the unit
/// of spike, shift and oscillation magnitudes.
double base_profile_std(const BuildingProfile& profile, std::int64_t start_hour, std::size_t hours);

}  // namespace mguard
