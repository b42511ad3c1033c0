#include "mguard/data/windows.hpp"

#include "mguard/binary_io.hpp"
#include "mguard/error.hpp"
#include "mguard/log.hpp"
#include "mguard/nn/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mguard {

const char* to_string(WindowLabel label) {
  switch (label) {
    case WindowLabel::normal: return "normal";
    case WindowLabel::anomalous: return "anomalous";
    case WindowLabel::unlabeled: return "unlabeled";
  }
  return "unknown";
}

std::size_t window_count(std::size_t length, std::size_t window_length, std::size_t stride) {
  if (window_length == 0 || stride == 0 || length < window_length) return 0;
  return (length - window_length) / stride + 1;
}

std::vector<Window> make_windows(const BuildingSeries& series, int window_length, int stride) {
  if (window_length < 1) throw ConfigError("window_length must be positive");
  if (stride < 1) throw ConfigError("window stride must be positive");
  const auto L = static_cast<std::size_t>(window_length);
  if (series.size() < L) {
    throw DataError("building '" + series.building_id + "' has " + std::to_string(series.size()) +
                    " hours, fewer than one window of " + std::to_string(L));
  }
  const std::size_t count = window_count(series.size(), L, static_cast<std::size_t>(stride));

  // Prefix sums of labels give the at-least-one rule in O(1) per window.
  std::vector<std::size_t> anomalous_prefix;
  if (series.labels) {
    anomalous_prefix.assign(series.size() + 1, 0);
    for (std::size_t i = 0; i < series.size(); ++i) {
      anomalous_prefix[i + 1] = anomalous_prefix[i] + ((*series.labels)[i] != 0 ? 1 : 0);
    }
  }

  std::vector<Window> windows;
  windows.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * static_cast<std::size_t>(stride);
    Window w;
    w.building_id = series.building_id;
    w.start_index = start;
    w.values.resize(static_cast<Index>(L));
    for (std::size_t i = 0; i < L; ++i) w.values(static_cast<Index>(i)) = static_cast<float>(series.readings[start + i]);
    if (series.labels) {
      w.label = anomalous_prefix[start + L] - anomalous_prefix[start] > 0 ? WindowLabel::anomalous
                                                                          : WindowLabel::normal;
    } else {
      w.label = WindowLabel::unlabeled;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

DatasetSplit split_dataset(std::span<const BuildingSeries> train_buildings, const SplitOptions& options, Rng& rng) {
  if (!(options.holdout_fraction >= 0.0 && options.holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must lie in [0, 1)");
  }
  const int anomalous_stride =
      options.validation_anomalous_stride > 0 ? options.validation_anomalous_stride : options.window_length;

  std::vector<Window> normal_pool;
  DatasetSplit split;
  for (const auto& series : train_buildings) {
    if (series.size() < static_cast<std::size_t>(options.window_length)) {
      warn("skipping building '" + series.building_id + "': shorter than one window");
      continue;
    }
    if (!series.labels) {
      warn("skipping unlabeled training building '" + series.building_id + "'");
      continue;
    }
    for (auto& w : make_windows(series, options.window_length, options.train_stride)) {
      if (w.label == WindowLabel::normal) normal_pool.push_back(std::move(w));
    }
    for (auto& w : make_windows(series, options.window_length, anomalous_stride)) {
      if (w.label == WindowLabel::anomalous) split.validation.push_back(std::move(w));
    }
  }

  std::sort(normal_pool.begin(), normal_pool.end());
  shuffle(std::span<Window>(normal_pool), rng);
  const auto holdout =
      static_cast<std::size_t>(std::llround(options.holdout_fraction * static_cast<double>(normal_pool.size())));
  for (std::size_t i = 0; i < normal_pool.size(); ++i) {
    (i < holdout ? split.validation : split.train).push_back(std::move(normal_pool[i]));
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end(), [](const Window& a, const Window& b) {
    if (a.label != b.label) return a.label < b.label;
    return a < b;
  });

  if (std::none_of(split.validation.begin(), split.validation.end(),
                   [](const Window& w) { return w.label == WindowLabel::anomalous; })) {
    warn("no anomalous windows available for validation; threshold calibration will be degenerate");
  }
  return split;
}

BuildingPartition partition_buildings(std::vector<BuildingSeries> buildings, double test_fraction, Rng& rng) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) throw ConfigError("test_building_fraction must lie in [0, 1]");
  auto by_id = [](const BuildingSeries& a, const BuildingSeries& b) { return a.building_id < b.building_id; };
  std::sort(buildings.begin(), buildings.end(), by_id);
  shuffle(std::span<BuildingSeries>(buildings), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(buildings.size())));
  BuildingPartition out;
  for (std::size_t i = 0; i < buildings.size(); ++i) (i < n_test ? out.test : out.train).push_back(std::move(buildings[i]));
  std::sort(out.train.begin(), out.train.end(), by_id);
  std::sort(out.test.begin(), out.test.end(), by_id);
  return out;
}

std::vector<Window> make_test_windows(std::span<const BuildingSeries> test_buildings, int window_length) {
  std::vector<Window> out;
  for (const auto& series : test_buildings) {
    if (series.size() < static_cast<std::size_t>(window_length)) {
      warn("skipping test building '" + series.building_id + "': shorter than one window");
      continue;
    }
    for (auto& w : make_windows(series, window_length, window_length)) out.push_back(std::move(w));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint8_t> encode_window_store(const WindowStore& store) {
  ByteWriter w;
  w.put_bytes(std::string_view(kWindowStoreMagic, 4));
  w.put(kWindowStoreVersion);
  w.put(store.window_length);
  w.put(static_cast<std::uint64_t>(store.windows.size()));
  for (const auto& window : store.windows) {
    expect_dim("window length", store.window_length, window.values.size());
    w.put(static_cast<std::uint32_t>(window.building_id.size()));
    w.put_bytes(window.building_id);
    w.put(window.start_index);
    w.put(static_cast<std::uint8_t>(window.label));
    w.put_floats(std::span<const float>(window.values.data(), static_cast<std::size_t>(window.values.size())));
  }
  return std::move(w.bytes());
}

WindowStore decode_window_store(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "window store");
  const std::string magic = r.get_string(4);
  if (magic != std::string_view(kWindowStoreMagic, 4)) {
    throw FormatError("window store magic mismatch: expected 'MGWD', found '" + magic + "'");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kWindowStoreVersion) {
    throw FormatError("unsupported window store version " + std::to_string(version));
  }
  WindowStore store;
  store.window_length = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  const std::size_t min_record = 4 + 8 + 1 + 4 * static_cast<std::size_t>(store.window_length);
  if (count > bytes.size() / min_record) throw FormatError("window store: count exceeds file size");
  store.windows.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Window w;
    const auto id_length = r.get<std::uint32_t>();
    w.building_id = r.get_string(id_length);
    w.start_index = r.get<std::uint64_t>();
    const auto label = r.get<std::uint8_t>();
    if (label > 2) throw FormatError("window store: bad label byte " + std::to_string(label));
    w.label = static_cast<WindowLabel>(label);
    w.values.resize(store.window_length);
    r.get_floats(std::span<float>(w.values.data(), store.window_length));
    store.windows.push_back(std::move(w));
  }
  if (!r.at_end()) throw FormatError("window store: trailing bytes");
  return store;
}

void write_window_store(const std::filesystem::path& path, const WindowStore& store) {
  write_file_bytes(path, encode_window_store(store));
}

WindowStore read_window_store(const std::filesystem::path& path) { return decode_window_store(read_file_bytes(path)); }

}  // namespace mguard
