#pragma once

#include "mguard/data/series.hpp"
#include "mguard/detection/inversion.hpp"
#include "mguard/training/trainer.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace mguard {

struct OverlayOptions {
  std::size_t window_length = 60;
  std::optional<std::size_t> from;  // first sample shown (inclusive)
  std::optional<std::size_t> to;    // last sample shown (exclusive)
  double width = 1000;
  double height = 320;
};

/// Meter readings of one building with detected windows drawn as red bands
/// (element ids detected-0, detected-1, ...) and ground-truth anomaly runs
/// as green bands (truth-0, ...). `detections` may contain other buildings'
/// windows; only this building's anomalous verdicts are drawn.
std::string series_overlay_svg(const BuildingSeries& series, std::span<const ScoredWindow> detections,
                               const OverlayOptions& options = {});

/// Per-iteration discriminator and generator losses.
std::string loss_curves_svg(const TrainLog& log, double width = 1000, double height = 320);

}  // namespace mguard
