#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mguard {

/// A named contiguous slice of a flat parameter vector.
struct ParamBlock {
  std::string name;
  std::size_t offset;
  std::size_t size;
};

struct GradCheckEntry {
  std::string name;
  std::size_t count = 0;
  double max_abs_error = 0.0;
  /// Largest |a - n| / max(|a|, |n|) over elements whose absolute error
  /// exceeds the absolute floor.
  double max_rel_error = 0.0;
  std::size_t failures = 0;
};

struct GradCheckReport {
  double rel_tolerance = 1e-3;
  double abs_floor = 1e-5;
  std::vector<GradCheckEntry> entries;

  double max_rel_error() const;
  double max_abs_error() const;
  bool passed() const;
  std::string summary() const;
};

/// Compares `analytic` against float64 central differences of `loss`
/// around `params`. An element passes when |a - n| <= abs_floor or
/// |a - n| <= rel_tolerance * max(|a|, |n|).
GradCheckReport grad_check(const std::function<double(std::span<const double>)>& loss,
                           std::span<const double> params, std::span<const double> analytic,
                           std::span<const ParamBlock> blocks, double step = 1e-3, double rel_tolerance = 1e-3,
                           double abs_floor = 1e-5);

}  // namespace mguard
