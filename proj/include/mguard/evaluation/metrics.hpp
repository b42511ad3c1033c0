#pragma once

#include "mguard/data/windows.hpp"
#include "mguard/detection/inversion.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace mguard {

/// Anomalous is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  std::uint64_t unlabeled = 0;  // excluded from the four cells

  std::uint64_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const bool> predicted_anomalous, std::span<const WindowLabel> labels);

/// Uses each window's verdict; throws DataError if one is unset.
ConfusionMatrix confusion(std::span<const ScoredWindow> scored);

/// Ratios with a zero denominator are reported as 0 and flagged.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  bool accuracy_undefined = false;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  bool specificity_undefined = false;
};

Metrics metrics(const ConfusionMatrix& cm);

/// Area under the ROC curve by trapezoids over tie groups of equal score,
/// i.e. P(score of a random anomalous window > a random normal one) with
/// ties counting one half. Computed from integer counts, so equal to the
/// pairwise definition exactly. Throws DataError unless both classes occur.
double roc_auc(std::span<const double> scores, std::span<const bool> anomalous);

/// Over labeled windows only.
std::optional<double> roc_auc(std::span<const ScoredWindow> scored);

struct MetricsReport {
  ConfusionMatrix confusion;
  Metrics metrics;
  std::optional<double> roc_auc;  // absent when only one class is labeled
  double tau = 0.0;  // NaN: verdicts taken as recorded
  std::string config_fingerprint;
};

MetricsReport evaluate_scores(std::span<const ScoredWindow> scored, double tau, std::string config_fingerprint = {});

/// Human-readable summary.
std::string render_report_text(const MetricsReport& report);
/// Rows "metric,value".
std::string render_metrics_csv(const MetricsReport& report);
/// 2x2 matrix with actual classes as rows, predicted as columns.
std::string render_confusion_csv(const ConfusionMatrix& cm);

}  // namespace mguard
