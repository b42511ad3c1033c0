#include "mguard/app/commands.hpp"

#include "mguard/app/plot.hpp"
#include "mguard/binary_io.hpp"
#include "mguard/data/series.hpp"
#include "mguard/error.hpp"
#include "mguard/log.hpp"
#include "mguard/model/checkpoint.hpp"
#include "mguard/nn/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace mguard {

void write_resolved_config(const RunConfig& config, const fs::path& out_dir, const std::string& command) {
  write_text_file(out_dir / (command + ".ini"), config.to_ini());
}

SynthCorpus cmd_synth(const RunConfig& config, const fs::path& out_dir) {
  const auto corpus = generate_corpus(synth_config(config));
  write_corpus_csv(out_dir / files::corpus, corpus);
  write_resolved_config(config, out_dir, "synth");
  return corpus;
}

namespace {

std::string normalization_csv(const std::vector<BuildingSeries>& train, const std::vector<BuildingSeries>& test) {
  std::string out = "building_id,role,mu,sigma,all_missing\n";
  auto rows = [&](const std::vector<BuildingSeries>& part, const char* role) {
    for (const auto& s : part) {
      out += s.building_id + "," + role + "," + format_double(s.mu) + "," + format_double(s.sigma) + "," +
             (s.all_missing ? "1" : "0") + "\n";
    }
  };
  rows(train, "train");
  rows(test, "test");
  return out;
}

WindowStore make_store(std::uint32_t window_length, std::vector<Window> windows) {
  WindowStore store;
  store.window_length = window_length;
  store.windows = std::move(windows);
  return store;
}

}  // namespace

PreprocessSummary cmd_preprocess(const RunConfig& config, const fs::path& input,
                                 const std::optional<fs::path>& test_input, const fs::path& out_dir) {
  const auto window_length = static_cast<int>(config.get_int("data.window_length"));
  const double clip_c = config.get_double("data.clip_c");
  if (window_length < 1) throw ConfigError("data.window_length must be >= 1");

  BuildingPartition parts;
  if (test_input) {
    parts.train = ingest_csv(input);
    parts.test = ingest_csv(*test_input);
  } else {
    Rng rng(mix_seed(config.seed(), 0x7061727469));  // "parti"
    parts = partition_buildings(ingest_csv(input), config.get_double("data.test_building_fraction"), rng);
  }
  for (auto& s : parts.train) s = prepare_series(std::move(s), clip_c);
  for (auto& s : parts.test) s = prepare_series(std::move(s), clip_c);

  SplitOptions options;
  options.window_length = window_length;
  options.holdout_fraction = config.get_double("data.holdout_fraction");
  options.train_stride = static_cast<int>(config.get_int("data.train_stride"));
  Rng split_rng(mix_seed(config.seed(), 0x73706c6974));  // "split"
  auto split = split_dataset(parts.train, options, split_rng);
  split.test = make_test_windows(parts.test, window_length);

  PreprocessSummary summary;
  summary.train_buildings = parts.train.size();
  summary.test_buildings = parts.test.size();
  summary.train_windows = split.train.size();
  summary.validation_windows = split.validation.size();
  summary.validation_anomalous = static_cast<std::size_t>(std::count_if(
      split.validation.begin(), split.validation.end(), [](const Window& w) { return w.label == WindowLabel::anomalous; }));
  summary.test_windows = split.test.size();

  const auto L = static_cast<std::uint32_t>(window_length);
  write_window_store(out_dir / files::train_windows, make_store(L, std::move(split.train)));
  write_window_store(out_dir / files::validation_windows, make_store(L, std::move(split.validation)));
  write_window_store(out_dir / files::test_windows, make_store(L, std::move(split.test)));
  write_text_file(out_dir / files::normalization, normalization_csv(parts.train, parts.test));
  write_resolved_config(config, out_dir, "preprocess");
  return summary;
}

namespace {

WindowStore load_store(const fs::path& data_dir, const char* name, const ModelConfig& model) {
  auto store = read_window_store(data_dir / name);
  if (static_cast<int>(store.window_length) != model.window_length)
    throw ConfigError(std::string(name) + " holds windows of length " + std::to_string(store.window_length) +
                      " but data.window_length is " + std::to_string(model.window_length));
  return store;
}

struct LoadedModel {
  Generator<float> generator;
  Discriminator<float> discriminator;
};

LoadedModel load_model(const fs::path& path, const ModelConfig& model) {
  const auto ckpt = load_checkpoint(path, model);
  return {restore_generator(ckpt), restore_discriminator(ckpt)};
}

}  // namespace

TrainOutcome cmd_train(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir,
                       const std::optional<fs::path>& resume) {
  const auto model = model_config(config);
  auto train_cfg = train_config(config);
  const auto store = load_store(data_dir, files::train_windows, model);
  train_cfg.checkpoint_dir = out_dir / files::checkpoints;

  auto state = resume ? resume_training_state(load_checkpoint(*resume), model, train_cfg)
                      : TrainState::fresh(model, train_cfg);
  TrainOutcome outcome;
  outcome.log = train(state, store.windows, train_cfg);
  outcome.stability = stability_report(outcome.log);

  const EpochSummary* last = outcome.log.epochs.empty() ? nullptr : &outcome.log.epochs.back();
  save_checkpoint(out_dir / files::model, make_training_checkpoint(state, train_cfg, last));
  write_text_file(out_dir / files::train_log, train_log_csv(outcome.log));
  write_text_file(out_dir / files::stability, outcome.stability.to_json());
  write_resolved_config(config, out_dir, "train");
  return outcome;
}

Threshold cmd_calibrate(const RunConfig& config, const fs::path& data_dir, const fs::path& model_path,
                        const fs::path& out_dir) {
  const auto model = model_config(config);
  const auto inversion = inversion_config(config);
  auto windows = load_store(data_dir, files::validation_windows, model).windows;
  const auto cap = config.get_u64("detection.calibration_max_normal");

  std::vector<Window> selected;
  std::vector<Window> normal;
  for (auto& w : windows) (w.label == WindowLabel::normal ? normal : selected).push_back(std::move(w));
  if (cap > 0 && normal.size() > cap) {
    std::sort(normal.begin(), normal.end());
    Rng rng(mix_seed(config.seed(), 0x63616c6962));  // "calib"
    shuffle(std::span<Window>(normal), rng);
    normal.resize(cap);
  }
  for (auto& w : normal) selected.push_back(std::move(w));
  std::sort(selected.begin(), selected.end());

  const auto m = load_model(model_path, model);
  const auto scored = score_batch(m.generator, m.discriminator, selected, inversion);
  const auto threshold = calibrate_threshold(scored);
  write_text_file(out_dir / files::validation_scores, scores_csv(scored));
  write_threshold(out_dir / files::threshold, threshold);
  write_resolved_config(config, out_dir, "calibrate");
  return threshold;
}

std::vector<ScoredWindow> cmd_detect(const RunConfig& config, const fs::path& data_dir, const fs::path& model_path,
                                     const fs::path& threshold_path, const fs::path& out_dir) {
  const auto model = model_config(config);
  const auto inversion = inversion_config(config);
  const auto windows = load_store(data_dir, files::test_windows, model).windows;
  const auto threshold = read_threshold(threshold_path);
  const auto m = load_model(model_path, model);
  auto scored = score_batch(m.generator, m.discriminator, windows, inversion);
  classify(scored, threshold.tau);
  write_text_file(out_dir / files::scores, scores_csv(scored));
  write_resolved_config(config, out_dir, "detect");
  return scored;
}

MetricsReport cmd_evaluate(const RunConfig& config, const fs::path& scores_path,
                           const std::optional<fs::path>& threshold_path, const fs::path& out_dir) {
  const auto scored = parse_scores_csv(read_text_file(scores_path));
  MetricsReport report;
  report.confusion = confusion(scored);
  report.metrics = metrics(report.confusion);
  report.roc_auc = roc_auc(scored);
  report.config_fingerprint = config.fingerprint();
  if (threshold_path) {
    report.tau = read_threshold(*threshold_path).tau;
    for (const auto& s : scored) {
      if (*s.anomalous != is_anomalous(s.score, report.tau))
        throw DataError("verdict of " + s.building_id + "@" + std::to_string(s.start_index) +
                        " disagrees with the given threshold");
    }
  } else {
    report.tau = std::numeric_limits<double>::quiet_NaN();
  }
  write_text_file(out_dir / files::report, render_report_text(report));
  write_text_file(out_dir / files::metrics, render_metrics_csv(report));
  write_text_file(out_dir / files::confusion, render_confusion_csv(report.confusion));
  write_resolved_config(config, out_dir, "evaluate");
  return report;
}

std::vector<fs::path> cmd_plot(const RunConfig& config, const PlotRequest& request, const fs::path& out_dir) {
  std::vector<fs::path> written;
  std::vector<ScoredWindow> scored;
  if (request.scores) scored = parse_scores_csv(read_text_file(*request.scores));

  if (!request.series.empty()) {
    const auto buildings = ingest_csv(request.series);
    std::set<std::string> wanted(request.buildings.begin(), request.buildings.end());
    if (wanted.empty()) {
      for (const auto& s : scored) wanted.insert(s.building_id);
      if (wanted.empty())
        for (const auto& b : buildings) wanted.insert(b.building_id);
    }
    OverlayOptions options;
    options.window_length = static_cast<std::size_t>(config.get_int("data.window_length"));
    options.from = request.from;
    options.to = request.to;
    std::set<std::string> found;
    for (const auto& b : buildings) {
      if (!wanted.contains(b.building_id)) continue;
      found.insert(b.building_id);
      std::string name = "series_" + b.building_id;
      if (request.from || request.to) {
        name += "_" + std::to_string(request.from.value_or(0)) + "-" +
                (request.to ? std::to_string(*request.to) : std::string("end"));
      }
      const auto path = out_dir / (name + ".svg");
      write_text_file(path, series_overlay_svg(b, scored, options));
      written.push_back(path);
    }
    for (const auto& id : request.buildings)
      if (!found.contains(id)) throw DataError("building '" + id + "' not found in " + request.series.string());
  }
  if (request.train_log) {
    const auto path = out_dir / "loss_curves.svg";
    write_text_file(path, loss_curves_svg(parse_train_log_csv(read_text_file(*request.train_log))));
    written.push_back(path);
  }
  write_resolved_config(config, out_dir, "plot");
  return written;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return 2;
  if (dynamic_cast<const DataError*>(&error)) return 3;
  if (dynamic_cast<const NumericError*>(&error)) return 4;
  return 1;
}

}  // namespace mguard
