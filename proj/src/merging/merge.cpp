#include "mfmil/merging/merge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfmil::merging {

using numkit::ParamSet;

namespace {

void require_models(std::span<const ParamSet> models, const ParamSet& reference, std::string_view op) {
  if (models.empty()) throw std::invalid_argument(std::string(op) + ": no models to merge");
  for (const auto& m : models) reference.require_congruent(m, op);
}

// Order-independent mean of a handful of values.
double canonical_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const double base = values.front();
  double offset = 0.0;
  for (double v : values) offset += v - base;
  return base + offset / static_cast<double>(values.size());
}

double canonical_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

}  // namespace

std::string_view to_string(MergeMethod method) { return method == MergeMethod::Soup ? "Soup" : "Ties"; }

MergeMethod parse_merge_method(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "soup") return MergeMethod::Soup;
  if (n == "ties") return MergeMethod::Ties;
  throw std::invalid_argument("unknown merge method '" + std::string(name) + "'");
}

void MergeConfig::validate() const {
  if (!(trim_density > 0.0 && trim_density <= 1.0)) throw std::invalid_argument("trim density must lie in (0, 1]");
  if (!(scale > 0.0)) throw std::invalid_argument("merge scale must be positive");
}

ParamSet soup(std::span<const ParamSet> models) {
  if (models.empty()) throw std::invalid_argument("soup: no models to merge");
  require_models(models, models.front(), "soup");
  ParamSet out = models.front().zeros_like();
  std::vector<double> column(models.size());
  for (std::size_t e = 0; e < out.size(); ++e) {
    auto& dst = out.entry(e).values;
    for (std::size_t i = 0; i < dst.size(); ++i) {
      for (std::size_t m = 0; m < models.size(); ++m) column[m] = models[m].entry(e).values[i];
      dst[i] = canonical_mean(column);
    }
  }
  return out;
}

std::size_t trim_keep_count(double density, std::size_t n) {
  const double exact = density * static_cast<double>(n);
  const double nearest = std::round(exact);
  // Absorb representation error such as (2/3) * 3 landing just above 2.
  const double k = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact) ? nearest : std::ceil(exact);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

ParamSet ties_task_vector(const ParamSet& init, std::span<const ParamSet> models, const MergeConfig& cfg) {
  cfg.validate();
  require_models(models, init, "ties");
  const std::vector<double> base = init.flatten();
  const std::size_t n = base.size();
  const std::size_t keep = trim_keep_count(cfg.trim_density, n);

  // Trimmed task vectors, one per model.
  std::vector<std::vector<double>> trimmed(models.size());
  std::vector<std::size_t> order(n);
  for (std::size_t m = 0; m < models.size(); ++m) {
    std::vector<double> tau = models[m].flatten();
    for (std::size_t i = 0; i < n; ++i) tau[i] -= base[i];
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto by_magnitude = [&](std::size_t a, std::size_t b) {
      const double ma = std::abs(tau[a]);
      const double mb = std::abs(tau[b]);
      return ma != mb ? ma > mb : a < b;
    };
    if (keep < n) std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), by_magnitude);
    std::vector<double> kept(n, 0.0);
    for (std::size_t r = 0; r < keep; ++r) kept[order[r]] = tau[order[r]];
    trimmed[m] = std::move(kept);
  }

  std::vector<double> merged(n, 0.0);
  std::vector<double> column;
  column.reserve(models.size());
  for (std::size_t i = 0; i < n; ++i) {
    column.clear();
    for (const auto& t : trimmed) column.push_back(t[i]);
    const bool positive = canonical_sum(column) >= 0.0;
    column.clear();
    for (const auto& t : trimmed) {
      const double v = t[i];
      if ((positive && v > 0.0) || (!positive && v < 0.0)) column.push_back(v);
    }
    merged[i] = column.empty() ? 0.0 : cfg.scale * canonical_mean(column);
  }

  ParamSet out = init.zeros_like();
  out.assign_flat(merged);
  return out;
}

ParamSet ties(const ParamSet& init, std::span<const ParamSet> models, const MergeConfig& cfg) {
  ParamSet out = ties_task_vector(init, models, cfg);
  for (std::size_t e = 0; e < out.size(); ++e) {
    auto& dst = out.entry(e).values;
    const auto& src = init.entry(e).values;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] + dst[i];
  }
  return out;
}

ParamSet merge(const ParamSet& init, std::span<const ParamSet> models, const MergeConfig& cfg) {
  cfg.validate();
  return cfg.method == MergeMethod::Soup ? soup(models) : ties(init, models, cfg);
}

}  // namespace mfmil::merging
