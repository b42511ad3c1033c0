#pragma once

#include "mguard/app/config.hpp"
#include "mguard/detection/threshold.hpp"
#include "mguard/evaluation/metrics.hpp"
#include "mguard/training/trainer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mguard {

namespace fs = std::filesystem;

/// File names inside command output directories.
namespace files {
inline constexpr const char* corpus = "corpus.csv";
inline constexpr const char* train_windows = "train.mgwd";
inline constexpr const char* validation_windows = "validation.mgwd";
inline constexpr const char* test_windows = "test.mgwd";
inline constexpr const char* normalization = "normalization.csv";
inline constexpr const char* model = "model.glsm";
inline constexpr const char* checkpoints = "checkpoints";
inline constexpr const char* train_log = "train_log.csv";
inline constexpr const char* stability = "stability.json";
inline constexpr const char* validation_scores = "validation_scores.csv";
inline constexpr const char* threshold = "threshold.txt";
inline constexpr const char* scores = "scores.csv";
inline constexpr const char* report = "report.txt";
inline constexpr const char* metrics = "metrics.csv";
inline constexpr const char* confusion = "confusion.csv";
}  // namespace files

/// Every command writes its resolved config as <out>/<command>.ini.
void write_resolved_config(const RunConfig& config, const fs::path& out_dir, const std::string& command);

SynthCorpus cmd_synth(const RunConfig& config, const fs::path& out_dir);

struct PreprocessSummary {
  std::size_t train_buildings = 0;
  std::size_t test_buildings = 0;
  std::size_t train_windows = 0;
  std::size_t validation_windows = 0;
  std::size_t validation_anomalous = 0;
  std::size_t test_windows = 0;
};

/// Ingests `input`; with `test_input` that file supplies the test
/// buildings, otherwise data.test_building_fraction of `input` does.
PreprocessSummary cmd_preprocess(const RunConfig& config, const fs::path& input,
                                 const std::optional<fs::path>& test_input, const fs::path& out_dir);

struct TrainOutcome {
  TrainLog log;
  StabilityReport stability;
};

TrainOutcome cmd_train(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir,
                       const std::optional<fs::path>& resume = std::nullopt);

/// Scores the validation windows (normal windows capped at
/// detection.calibration_max_normal by a seeded draw when > 0) and picks tau.
Threshold cmd_calibrate(const RunConfig& config, const fs::path& data_dir, const fs::path& model,
                        const fs::path& out_dir);

std::vector<ScoredWindow> cmd_detect(const RunConfig& config, const fs::path& data_dir, const fs::path& model,
                                     const fs::path& threshold, const fs::path& out_dir);

/// Uses the verdicts stored in the scores CSV.
MetricsReport cmd_evaluate(const RunConfig& config, const fs::path& scores, const std::optional<fs::path>& threshold,
                           const fs::path& out_dir);

struct PlotRequest {
  fs::path series;                      // ingestion CSV with raw readings and labels
  std::optional<fs::path> scores;       // detection CSV
  std::optional<fs::path> train_log;    // emits loss curves when set
  std::vector<std::string> buildings;   // empty: every building that appears in the scores (or the CSV)
  std::optional<std::size_t> from, to;  // sample range for zoomed plots
};

/// Returns the written SVG paths.
std::vector<fs::path> cmd_plot(const RunConfig& config, const PlotRequest& request, const fs::path& out_dir);

/// Maps an exception to the process exit code (2 config, 3 data, 4 numeric, 1 other).
int exit_code_for(const std::exception& error);

}  // namespace mguard
