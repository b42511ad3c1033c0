#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mguard {

/// One building's hourly readings on a gapless grid.
///
/// `readings` holds kWh after ingestion (NaN marks a missing hour), and the
/// normalized or squashed values after the corresponding pipeline stages.
struct BuildingSeries {
  std::string building_id;
  std::int64_t start_hour = 0;  // hours since 1970-01-01T00:00Z
  std::vector<double> readings;
  std::optional<std::vector<std::uint8_t>> labels;
  double mu = 0.0;
  double sigma = 1.0;
  bool all_missing = false;

  std::size_t size() const { return readings.size(); }
  std::size_t missing_count() const;
};

/// Column names of the meter CSV. An absent label column in the file yields
/// series without labels.
struct CsvSchema {
  std::string building_col = "building_id";
  std::string timestamp_col = "timestamp";
  std::string reading_col = "meter_reading";
  std::string label_col = "anomaly";
};

/// Parses "YYYY-MM-DD[T| ]HH[:MM[:SS]][Z|+HH:MM|-HH:MM]" into hours since the
/// epoch (UTC). Minutes and seconds must be zero. Returns nullopt on failure.
std::optional<std::int64_t> parse_hour_timestamp(std::string_view text);

/// "YYYY-MM-DD HH:00:00" for an hour index.
std::string format_hour_timestamp(std::int64_t hour);

/// One series per building sorted by building id, each on a gapless hourly
/// grid from its first to its last timestamp. Throws DataError with the line
/// number for unparseable rows and for duplicate (building, timestamp) pairs.
std::vector<BuildingSeries> parse_meter_csv(std::string_view text, const CsvSchema& schema = {});
std::vector<BuildingSeries> ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Forward fill, then backward fill. A series with no observed value at all is
/// zero-filled and flagged `all_missing` (a warning is emitted); it
/// normalizes to zeros.
BuildingSeries impute(BuildingSeries series);

inline constexpr double kDegenerateSigma = 1e-8;

/// Per-building z-score with the population standard deviation. Records
/// mu/sigma on the series; sigma below kDegenerateSigma is replaced by 1.
BuildingSeries normalize(BuildingSeries series);

std::vector<double> unnormalize(std::span<const double> values, double mu, double sigma);

inline constexpr double kDefaultClip = 3.5;

/// Clip to [-c, c], then divide by c, mapping z-scores into the generator's
/// Tanh range.
double squash(double value, double clip_c = kDefaultClip);
double unsquash(double value, double clip_c = kDefaultClip);
BuildingSeries squash(BuildingSeries series, double clip_c = kDefaultClip);

/// impute -> normalize -> squash.
BuildingSeries prepare_series(BuildingSeries series, double clip_c = kDefaultClip);

}  // namespace mguard
