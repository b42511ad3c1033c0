#include "mguard/evaluation/metrics.hpp"

#include "mguard/detection/threshold.hpp"
#include "mguard/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

namespace mguard {

ConfusionMatrix confusion(std::span<const bool> predicted_anomalous, std::span<const WindowLabel> labels) {
  expect_dim("verdict count", static_cast<long>(labels.size()), static_cast<long>(predicted_anomalous.size()));
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predicted_anomalous[i];
    switch (labels[i]) {
      case WindowLabel::anomalous: (pred ? cm.tp : cm.fn) += 1; break;
      case WindowLabel::normal: (pred ? cm.fp : cm.tn) += 1; break;
      case WindowLabel::unlabeled: cm.unlabeled += 1; break;
    }
  }
  return cm;
}

ConfusionMatrix confusion(std::span<const ScoredWindow> scored) {
  auto pred = std::make_unique<bool[]>(scored.size());
  std::vector<WindowLabel> labels;
  labels.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (!scored[i].anomalous)
      throw DataError("window " + scored[i].building_id + "@" + std::to_string(scored[i].start_index) +
                      " has no verdict");
    pred[i] = *scored[i].anomalous;
    labels.push_back(scored[i].label);
  }
  return confusion(std::span<const bool>(pred.get(), scored.size()), labels);
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metrics metrics(const ConfusionMatrix& cm) {
  Metrics m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total(), m.accuracy_undefined);
  m.precision = ratio(cm.tp, cm.tp + cm.fp, m.precision_undefined);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, m.recall_undefined);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp, m.specificity_undefined);
  // Harmonic mean of precision and recall, from counts.
  m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, m.f1_undefined);
  m.f1_undefined = m.f1_undefined || m.precision_undefined || m.recall_undefined;
  return m;
}

double roc_auc(std::span<const double> scores, std::span<const bool> anomalous) {
  expect_dim("auc labels", static_cast<long>(scores.size()), static_cast<long>(anomalous.size()));
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Walk thresholds from high to low. Each tie group moves the ROC point by
  // (neg_g / N, pos_g / P); twice the trapezoid area, in units of 1/(P N),
  // is neg_g * (2 * tp_before + pos_g).
  std::uint64_t P = 0, N = 0, twice_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    if (std::isnan(scores[order[i]])) throw NumericError("AUC score is NaN");
    std::uint64_t pos = 0, neg = 0;
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) (anomalous[order[j]] ? pos : neg) += 1;
    twice_area += neg * (2 * P + pos);
    P += pos;
    N += neg;
    i = j;
  }
  if (P == 0 || N == 0) throw DataError("ROC AUC needs both anomalous and normal windows");
  return static_cast<double>(twice_area) / static_cast<double>(2 * P * N);
}

std::optional<double> roc_auc(std::span<const ScoredWindow> scored) {
  std::vector<double> scores;
  std::vector<char> labels;
  for (const auto& s : scored) {
    if (s.label == WindowLabel::unlabeled) continue;
    scores.push_back(s.score);
    labels.push_back(s.label == WindowLabel::anomalous);
  }
  const bool both = std::find(labels.begin(), labels.end(), 1) != labels.end() &&
                    std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!both) return std::nullopt;
  auto flags = std::make_unique<bool[]>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) flags[i] = labels[i] != 0;
  return roc_auc(scores, std::span<const bool>(flags.get(), labels.size()));
}

MetricsReport evaluate_scores(std::span<const ScoredWindow> scored, double tau, std::string config_fingerprint) {
  MetricsReport report;
  std::vector<ScoredWindow> classified(scored.begin(), scored.end());
  classify(classified, tau);
  report.confusion = confusion(classified);
  report.metrics = metrics(report.confusion);
  report.roc_auc = roc_auc(scored);
  report.tau = tau;
  report.config_fingerprint = std::move(config_fingerprint);
  return report;
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string render_report_text(const MetricsReport& r) {
  const auto& m = r.metrics;
  const auto& cm = r.confusion;
  auto line = [](const char* name, double value, bool undefined) {
    return std::string(name) + fixed(value) + (undefined ? "  (undefined: zero denominator)" : "") + "\n";
  };
  std::ostringstream out;
  out << "window-level evaluation\n";
  if (!r.config_fingerprint.empty()) out << "config:      " << r.config_fingerprint << "\n";
  out << "threshold:   " << (std::isnan(r.tau) ? std::string("not given (recorded verdicts)") : format_double(r.tau))
      << "\n";
  out << "windows:     " << cm.total() << " labeled, " << cm.unlabeled << " unlabeled (excluded)\n\n";
  out << line("accuracy:    ", m.accuracy, m.accuracy_undefined);
  out << line("precision:   ", m.precision, m.precision_undefined);
  out << line("recall:      ", m.recall, m.recall_undefined);
  out << line("f1:          ", m.f1, m.f1_undefined);
  out << line("specificity: ", m.specificity, m.specificity_undefined);
  out << "roc_auc:     " << (r.roc_auc ? fixed(*r.roc_auc) : std::string("n/a (single class)")) << "\n\n";
  out << "                 predicted normal  predicted anomalous\n";
  char row[128];
  std::snprintf(row, sizeof row, "actual normal    %16llu  %19llu\n", static_cast<unsigned long long>(cm.tn),
                static_cast<unsigned long long>(cm.fp));
  out << row;
  std::snprintf(row, sizeof row, "actual anomalous %16llu  %19llu\n", static_cast<unsigned long long>(cm.fn),
                static_cast<unsigned long long>(cm.tp));
  out << row;
  return out.str();
}

std::string render_metrics_csv(const MetricsReport& r) {
  const auto& m = r.metrics;
  std::ostringstream out;
  out << "metric,value\n";
  out << "accuracy," << format_double(m.accuracy) << "\n";
  out << "precision," << format_double(m.precision) << "\n";
  out << "recall," << format_double(m.recall) << "\n";
  out << "f1," << format_double(m.f1) << "\n";
  out << "specificity," << format_double(m.specificity) << "\n";
  out << "roc_auc," << (r.roc_auc ? format_double(*r.roc_auc) : std::string()) << "\n";
  out << "tau," << (std::isnan(r.tau) ? std::string() : format_double(r.tau)) << "\n";
  out << "tp," << r.confusion.tp << "\nfp," << r.confusion.fp << "\nfn," << r.confusion.fn << "\ntn,"
      << r.confusion.tn << "\nunlabeled," << r.confusion.unlabeled << "\n";
  std::string flags;
  for (auto [name, set] : {std::pair{"accuracy", m.accuracy_undefined}, {"precision", m.precision_undefined},
                           {"recall", m.recall_undefined}, {"f1", m.f1_undefined},
                           {"specificity", m.specificity_undefined}}) {
    if (set) flags += (flags.empty() ? "" : ";") + std::string(name);
  }
  out << "undefined," << flags << "\n";
  return out.str();
}

std::string render_confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "actual,predicted_normal,predicted_anomalous\n";
  out << "normal," << cm.tn << "," << cm.fp << "\n";
  out << "anomalous," << cm.fn << "," << cm.tp << "\n";
  return out.str();
}

}  // namespace mguard
