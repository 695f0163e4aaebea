#pragma once

#include <span>
#include <string_view>

#include "mfmil/numkit/param_set.hpp"

namespace mfmil::merging {

enum class MergeMethod { Soup, Ties };

std::string_view to_string(MergeMethod method);
MergeMethod parse_merge_method(std::string_view name);

struct MergeConfig {
  MergeMethod method = MergeMethod::Soup;
  double trim_density = 0.2;  // fraction of task-vector entries kept per model (TIES)
  double scale = 1.0;         // multiplier on the merged task vector (TIES)

  void validate() const;
};

/// Elementwise mean of congruent parameter sets. Each coordinate is
/// reduced over its values in sorted order as min + sum(x - min) / M, so
/// the result does not depend on input order and M copies of one model
/// return that model bit for bit.
numkit::ParamSet soup(std::span<const numkit::ParamSet> models);

/// Number of entries kept by TIES trimming: ceil(density * n), at least 1.
std::size_t trim_keep_count(double density, std::size_t n);

/// TIES merged task vector scaled by cfg.scale (before adding init):
///  1. tau_i = theta_i - init
///  2. keep the trim_keep_count largest |tau_i| entries over the whole
///     flattened vector, zero the rest (magnitude ties: lower index kept)
///  3. elected sign per coordinate = sign of sum_i trimmed tau_i, with
///     zero sums resolved to positive
///  4. mean over the non-zero trimmed entries that carry the elected sign;
///     coordinates without such entries are 0
numkit::ParamSet ties_task_vector(const numkit::ParamSet& init, std::span<const numkit::ParamSet> models,
                                  const MergeConfig& cfg);

/// init + ties_task_vector(init, models, cfg).
numkit::ParamSet ties(const numkit::ParamSet& init, std::span<const numkit::ParamSet> models, const MergeConfig& cfg);

/// Dispatch on cfg.method; init is only read by TIES.
numkit::ParamSet merge(const numkit::ParamSet& init, std::span<const numkit::ParamSet> models, const MergeConfig& cfg);

}  // namespace mfmil::merging
