// Command-line front end: one subcommand per pipeline stage.
#include "mguard/app/commands.hpp"
#include "mguard/error.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace mguard;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "global seed (overrides run.seed)");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--set", c.overrides, "override a config key: section.key=value (repeatable)");
}

RunConfig resolve(const Common& c) {
  RunConfig config;
  if (!c.config_path.empty()) config.merge_file(c.config_path);
  for (const auto& o : c.overrides) config.set(o);
  if (c.seed) config.set("run.seed", std::to_string(*c.seed));
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mguard: smart-meter anomaly detection with an LSTM GAN"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled meter corpus");
  add_common(synth, common);

  std::string input, test_input;
  auto* preprocess = app.add_subcommand("preprocess", "ingest, normalize and window a meter CSV");
  add_common(preprocess, common);
  preprocess->add_option("--input", input, "meter CSV (training buildings)")->required();
  preprocess->add_option("--test-input", test_input, "separate CSV of test buildings");

  std::string data_dir, resume, model, threshold, scores;
  auto* train = app.add_subcommand("train", "adversarial training on normal windows");
  add_common(train, common);
  train->add_option("--data", data_dir, "preprocess output directory")->required();
  train->add_option("--resume", resume, "resume from a training checkpoint");

  auto* calibrate = app.add_subcommand("calibrate", "score validation windows and choose the threshold");
  add_common(calibrate, common);
  calibrate->add_option("--data", data_dir, "preprocess output directory")->required();
  calibrate->add_option("--model", model, "model checkpoint")->required();

  auto* detect = app.add_subcommand("detect", "score and classify test windows");
  add_common(detect, common);
  detect->add_option("--data", data_dir, "preprocess output directory")->required();
  detect->add_option("--model", model, "model checkpoint")->required();
  detect->add_option("--threshold", threshold, "threshold file from calibrate")->required();

  auto* evaluate = app.add_subcommand("evaluate", "window-level metrics from a scores CSV");
  add_common(evaluate, common);
  evaluate->add_option("--scores", scores, "scores CSV from detect")->required();
  evaluate->add_option("--threshold", threshold, "threshold file (checked against the verdicts)");

  PlotRequest plot_request;
  std::string series, train_log;
  auto* plot = app.add_subcommand("plot", "SVG overlays and loss curves");
  add_common(plot, common);
  plot->add_option("--series", series, "meter CSV with readings and labels");
  plot->add_option("--scores", scores, "scores CSV from detect");
  plot->add_option("--train-log", train_log, "train_log.csv from train");
  plot->add_option("--building", plot_request.buildings, "building id to plot (repeatable)");
  plot->add_option("--from", plot_request.from, "first sample index");
  plot->add_option("--to", plot_request.to, "end sample index (exclusive)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto config = resolve(common);
    const fs::path out = common.out;
    if (synth->parsed()) {
      const auto corpus = cmd_synth(config, out);
      std::printf("wrote %zu buildings to %s\n", corpus.buildings.size(), (out / files::corpus).c_str());
    } else if (preprocess->parsed()) {
      std::optional<fs::path> test;
      if (!test_input.empty()) test = test_input;
      const auto s = cmd_preprocess(config, input, test, out);
      std::printf("buildings: %zu train, %zu test\nwindows: %zu train, %zu validation (%zu anomalous), %zu test\n",
                  s.train_buildings, s.test_buildings, s.train_windows, s.validation_windows, s.validation_anomalous,
                  s.test_windows);
    } else if (train->parsed()) {
      std::optional<fs::path> from;
      if (!resume.empty()) from = resume;
      const auto outcome = cmd_train(config, data_dir, out, from);
      for (const auto& e : outcome.log.epochs)
        std::printf("epoch %d: L_D %.4f  L_G %.4f  D accuracy %.3f\n", e.epoch, e.mean_d_loss, e.mean_g_loss,
                    e.mean_d_accuracy);
      std::printf("stability: %zu epoch(s) outside the accuracy band\n",
                  outcome.stability.d_accuracy_band_violations.size());
    } else if (calibrate->parsed()) {
      const auto t = cmd_calibrate(config, data_dir, model, out);
      std::printf("tau = %s (validation F1 %.4f over %zu candidates)\n", format_double(t.tau).c_str(), t.f1,
                  t.candidate_count);
    } else if (detect->parsed()) {
      const auto scored = cmd_detect(config, data_dir, model, threshold, out);
      const auto flagged = std::count_if(scored.begin(), scored.end(), [](const auto& s) { return *s.anomalous; });
      std::printf("%zu windows scored, %td flagged anomalous\n", scored.size(), flagged);
    } else if (evaluate->parsed()) {
      std::optional<fs::path> t;
      if (!threshold.empty()) t = threshold;
      std::fputs(render_report_text(cmd_evaluate(config, scores, t, out)).c_str(), stdout);
    } else if (plot->parsed()) {
      plot_request.series = series;
      if (!scores.empty()) plot_request.scores = scores;
      if (!train_log.empty()) plot_request.train_log = train_log;
      if (series.empty() && train_log.empty()) throw ConfigError("plot needs --series and/or --train-log");
      for (const auto& p : cmd_plot(config, plot_request, out)) std::printf("wrote %s\n", p.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
