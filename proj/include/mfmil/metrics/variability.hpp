#pragma once

#include <cstddef>
#include <span>

namespace mfmil::metrics {

struct VariabilityStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;          // sample (n - 1) standard deviation
  bool std_defined = false;  // false for a single observation, where std is reported as 0
  std::size_t count = 0;
};

/// Throws std::invalid_argument on empty input.
VariabilityStats variability(std::span<const double> values);

}  // namespace mfmil::metrics
