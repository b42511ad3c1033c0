#pragma once

#include "mguard/data/series.hpp"
#include "mguard/nn/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mguard {

class Rng;

enum class WindowLabel : std::uint8_t { normal = 0, anomalous = 1, unlabeled = 2 };

const char* to_string(WindowLabel label);

/// A contiguous slice of a prepared series.
struct Window {
  std::string building_id;
  std::uint64_t start_index = 0;
  WindowLabel label = WindowLabel::unlabeled;
  VectorF values;

  friend bool operator<(const Window& a, const Window& b) {
    return a.building_id != b.building_id ? a.building_id < b.building_id : a.start_index < b.start_index;
  }
};

inline constexpr int kDefaultWindowLength = 60;

/// floor((length - window_length) / stride) + 1 for length >= window_length.
std::size_t window_count(std::size_t length, std::size_t window_length, std::size_t stride);

/// A window is anomalous iff any covered hour is labeled 1; unlabeled when
/// the series has no labels. Throws DataError if the series is shorter than
/// one window, ConfigError for a non-positive length or stride.
std::vector<Window> make_windows(const BuildingSeries& series, int window_length = kDefaultWindowLength,
                                 int stride = 1);

struct DatasetSplit {
  std::vector<Window> train;
  std::vector<Window> validation;
  std::vector<Window> test;
};

struct SplitOptions {
  int window_length = kDefaultWindowLength;
  double holdout_fraction = 0.10;
  int train_stride = 1;
  /// Stride of the anomalous validation windows; 0 means window_length.
  int validation_anomalous_stride = 0;
};

/// Training-building windows only (test stays empty). Normal stride-1
/// windows are pooled, sorted by (building, start), shuffled with `rng` and
/// split holdout/train; every anomalous window at the validation stride goes
/// to validation. Warns when no anomalous validation window exists.
DatasetSplit split_dataset(std::span<const BuildingSeries> train_buildings, const SplitOptions& options, Rng& rng);

struct BuildingPartition {
  std::vector<BuildingSeries> train;
  std::vector<BuildingSeries> test;
};

/// Seeded building-level split: buildings are sorted by id, shuffled, and
/// the first round(test_fraction * n) become test buildings. Both parts
/// keep id order.
BuildingPartition partition_buildings(std::vector<BuildingSeries> buildings, double test_fraction, Rng& rng);

/// Non-overlapping windows (stride = window_length) of every test building.
std::vector<Window> make_test_windows(std::span<const BuildingSeries> test_buildings,
                                      int window_length = kDefaultWindowLength);

inline constexpr char kWindowStoreMagic[4] = {'M', 'G', 'W', 'D'};
inline constexpr std::uint32_t kWindowStoreVersion = 1;

/// Binary window container, little-endian:
///   magic "MGWD" | version u32 | window_length u32 | count u64 |
///   per window: id length u32 + UTF-8 id, start_index u64, label u8,
///               window_length x f32
struct WindowStore {
  std::uint32_t window_length = kDefaultWindowLength;
  std::vector<Window> windows;
};

std::vector<std::uint8_t> encode_window_store(const WindowStore& store);
WindowStore decode_window_store(std::span<const std::uint8_t> bytes);
void write_window_store(const std::filesystem::path& path, const WindowStore& store);
WindowStore read_window_store(const std::filesystem::path& path);

}  // namespace mguard
