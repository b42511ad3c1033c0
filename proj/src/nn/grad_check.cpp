#include "mguard/nn/grad_check.hpp"

#include "mguard/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace mguard {

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

double GradCheckReport::max_abs_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_abs_error);
  return worst;
}

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.failures == 0; });
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << e.name << ": n=" << e.count << " max_rel=" << e.max_rel_error << " max_abs=" << e.max_abs_error
       << " failures=" << e.failures << '\n';
  }
  return os.str();
}

GradCheckReport grad_check(const std::function<double(std::span<const double>)>& loss,
                           std::span<const double> params, std::span<const double> analytic,
                           std::span<const ParamBlock> blocks, double step, double rel_tolerance,
                           double abs_floor) {
  expect_dim("grad_check analytic size", static_cast<long>(params.size()), static_cast<long>(analytic.size()));
  GradCheckReport report;
  report.rel_tolerance = rel_tolerance;
  report.abs_floor = abs_floor;

  std::vector<double> probe(params.begin(), params.end());
  for (const auto& block : blocks) {
    if (block.offset + block.size > params.size()) {
      throw ShapeError("grad_check block " + block.name, static_cast<long>(params.size()),
                       static_cast<long>(block.offset + block.size));
    }
    GradCheckEntry entry{block.name, block.size};
    for (std::size_t k = block.offset; k < block.offset + block.size; ++k) {
      const double saved = probe[k];
      probe[k] = saved + step;
      const double up = loss(probe);
      probe[k] = saved - step;
      const double down = loss(probe);
      probe[k] = saved;
      const double numeric = (up - down) / (2.0 * step);

      const double a = analytic[k];
      const double abs_err = std::abs(a - numeric);
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      if (abs_err > abs_floor) {
        const double rel = abs_err / std::max(std::abs(a), std::abs(numeric));
        entry.max_rel_error = std::max(entry.max_rel_error, rel);
        if (rel > rel_tolerance) ++entry.failures;
      }
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace mguard
