#pragma once

#include "mguard/detection/inversion.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mguard {

struct Threshold {
  double tau = 0.0;
  double f1 = 0.0;  // validation F1 at tau
  std::size_t candidate_count = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  bool degenerate = false;  // all validation scores equal
};

/// Sweeps -inf, +inf and the midpoints between consecutive distinct scores,
/// flagging S >= tau as anomalous; returns the F1-maximizing candidate,
/// preferring the largest tau among ties. Throws DataError unless both
/// classes are present.
Threshold calibrate_threshold(std::span<const double> scores, std::span<const bool> anomalous);

/// Convenience over scored windows; unlabeled windows are skipped.
Threshold calibrate_threshold(std::span<const ScoredWindow> validation);

/// S >= tau is anomalous.
inline bool is_anomalous(double score, double tau) { return score >= tau; }

void classify(std::span<ScoredWindow> scored, double tau);

/// key=value lines: tau, validation_f1, candidates, positives, negatives,
/// degenerate. tau may be "inf" / "-inf".
std::string format_threshold(const Threshold& threshold);
Threshold parse_threshold(const std::string& text);
void write_threshold(const std::filesystem::path& path, const Threshold& threshold);
Threshold read_threshold(const std::filesystem::path& path);

/// Columns: building_id,start_index,R,F,S,label,verdict. label and verdict
/// are 0/1, empty when unknown.
std::string scores_csv(std::span<const ScoredWindow> scored);
std::vector<ScoredWindow> parse_scores_csv(const std::string& text);

std::string format_double(double value);  // shortest round-trip form; inf/-inf/nan spelled out

}  // namespace mguard
