#include "mfmil/metrics/variability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfmil::metrics {

VariabilityStats variability(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("variability: empty input");
  VariabilityStats s;
  s.count = values.size();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  // Rounding can push the mean a hair outside [min, max] for near-constant input.
  s.mean = std::clamp(s.mean, s.min, s.max);
  if (values.size() >= 2) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    s.std_defined = true;
  }
  return s;
}

}  // namespace mfmil::metrics
