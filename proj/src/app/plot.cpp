#include "mguard/app/plot.hpp"

#include "mguard/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mguard {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double left = 60, right = 20, top = 30, bottom = 40;
  double width, height;
  double x0, x1, y0, y1;  // data ranges

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return top + (y1 - y) / (y1 - y0) * (height - top - bottom); }
};

std::string header(double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label, bool integer_x) {
  std::string out = "<g id=\"axes\" stroke=\"black\" data-x-min=\"" + num(f.x0) + "\" data-x-max=\"" + num(f.x1) + "\">\n";
  out += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(f.height - f.bottom) + "\" x2=\"" + num(f.width - f.right) +
         "\" y2=\"" + num(f.height - f.bottom) + "\"/>\n";
  out += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(f.top) + "\" x2=\"" + num(f.left) + "\" y2=\"" +
         num(f.height - f.bottom) + "\"/>\n</g>\n<g id=\"ticks\" fill=\"black\">\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / kTicks;
    const double y = f.y0 + (f.y1 - f.y0) * i / kTicks;
    char xl[32], yl[32];
    if (integer_x) std::snprintf(xl, sizeof xl, "%.0f", x);
    else std::snprintf(xl, sizeof xl, "%.3g", x);
    std::snprintf(yl, sizeof yl, "%.3g", y);
    out += "<text class=\"x-tick\" x=\"" + num(f.px(x)) + "\" y=\"" + num(f.height - f.bottom + 14) +
           "\" text-anchor=\"middle\">" + xl + "</text>\n";
    out += "<text class=\"y-tick\" x=\"" + num(f.left - 4) + "\" y=\"" + num(f.py(y) + 4) + "\" text-anchor=\"end\">" +
           yl + "</text>\n";
  }
  out += "<text x=\"" + num((f.left + f.width - f.right) / 2) + "\" y=\"" + num(f.height - 6) +
         "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  out += "<text x=\"12\" y=\"" + num(f.top - 10) + "\">" + escape(y_label) + "</text>\n</g>\n";
  return out;
}

std::string band(const Frame& f, const std::string& id, double a, double b, const char* color, double opacity) {
  return "<rect id=\"" + id + "\" x=\"" + num(f.px(a)) + "\" y=\"" + num(f.top) + "\" width=\"" +
         num(f.px(b) - f.px(a)) + "\" height=\"" + num(f.height - f.top - f.bottom) + "\" fill=\"" + color +
         "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
}

}  // namespace

std::string series_overlay_svg(const BuildingSeries& series, std::span<const ScoredWindow> detections,
                               const OverlayOptions& options) {
  const std::size_t n = series.size();
  const std::size_t from = std::min(options.from.value_or(0), n);
  const std::size_t to = std::min(options.to.value_or(n), n);
  if (from >= to) throw ConfigError("plot range is empty: from " + std::to_string(from) + " to " + std::to_string(to));

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t t = from; t < to; ++t) {
    if (std::isfinite(series.readings[t])) {
      lo = std::min(lo, series.readings[t]);
      hi = std::max(hi, series.readings[t]);
    }
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-9) lo -= 1, hi += 1;
  const double pad = 0.05 * (hi - lo);
  Frame f{.width = options.width, .height = options.height, .x0 = double(from), .x1 = double(to), .y0 = lo - pad, .y1 = hi + pad};
  if (to - from == 1) f.x1 = f.x0 + 1;

  std::string svg = header(f.width, f.height);
  svg += "<text x=\"" + num(f.left) + "\" y=\"16\">" + escape(series.building_id) + "</text>\n";

  // Ground-truth runs of labeled hours.
  svg += "<g id=\"truth\">\n";
  std::size_t truth = 0;
  if (series.labels) {
    const auto& labels = *series.labels;
    for (std::size_t t = from; t < to;) {
      if (!labels[t]) {
        ++t;
        continue;
      }
      std::size_t end = t;
      while (end < to && labels[end]) ++end;
      svg += band(f, "truth-" + std::to_string(truth++), double(t), double(end), "green", 0.25);
      t = end;
    }
  }
  svg += "</g>\n<g id=\"detected\">\n";
  std::vector<const ScoredWindow*> hits;
  for (const auto& d : detections)
    if (d.building_id == series.building_id && d.anomalous.value_or(false)) hits.push_back(&d);
  std::sort(hits.begin(), hits.end(), [](auto* a, auto* b) { return a->start_index < b->start_index; });
  std::size_t detected = 0;
  for (const auto* d : hits) {
    const auto a = std::max<std::size_t>(from, d->start_index);
    const auto b = std::min<std::size_t>(to, d->start_index + options.window_length);
    if (a >= b) continue;
    svg += band(f, "detected-" + std::to_string(detected++), double(a), double(b), "red", 0.25);
  }
  svg += "</g>\n";

  svg += "<path id=\"series\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" d=\"";
  bool pen = false;
  for (std::size_t t = from; t < to; ++t) {
    const double v = series.readings[t];
    if (!std::isfinite(v)) {
      pen = false;
      continue;
    }
    svg += (pen ? " L" : " M") + num(f.px(double(t))) + "," + num(f.py(v));
    pen = true;
  }
  svg += "\"/>\n";
  svg += axes(f, "sample (hour)", "meter reading", true);
  svg += "<g id=\"legend\"><text x=\"" + num(f.width - 260) + "\" y=\"16\" fill=\"red\">detected</text><text x=\"" +
         num(f.width - 190) + "\" y=\"16\" fill=\"green\">ground truth</text></g>\n";
  svg += "</svg>\n";
  return svg;
}

std::string loss_curves_svg(const TrainLog& log, double width, double height) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& it : log.iterations) {
    for (double v : {it.step.d_loss, it.step.g_loss}) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
  const double n = std::max<double>(2.0, static_cast<double>(log.iterations.size()));
  Frame f{.width = width, .height = height, .x0 = 1, .x1 = n, .y0 = lo, .y1 = hi};

  std::string svg = header(width, height);
  auto curve = [&](const char* id, const char* color, auto pick) {
    std::string d;
    for (const auto& it : log.iterations) {
      const double v = pick(it);
      if (!std::isfinite(v)) continue;
      d += (d.empty() ? "M" : " L") + num(f.px(double(it.iteration))) + "," + num(f.py(v));
    }
    return std::string("<path id=\"") + id + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\" d=\"" + d +
           "\"/>\n";
  };
  svg += curve("d-loss", "darkorange", [](const IterationRecord& r) { return r.step.d_loss; });
  svg += curve("g-loss", "purple", [](const IterationRecord& r) { return r.step.g_loss; });
  svg += axes(f, "iteration", "loss", true);
  svg += "<g id=\"legend\"><text x=\"" + num(width - 220) + "\" y=\"16\" fill=\"darkorange\">discriminator</text>" +
         "<text x=\"" + num(width - 120) + "\" y=\"16\" fill=\"purple\">generator</text></g>\n</svg>\n";
  return svg;
}

}  // namespace mguard
