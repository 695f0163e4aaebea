#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfmil/numkit/linalg.hpp"

namespace mfmil::metrics {

/// Probability that a random positive outscores a random negative, ties
/// counted 1/2 (normalized Mann-Whitney U). Computed by sorting; the
/// result is bit-identical to the pairwise count divided by n+ * n-.
/// Throws std::invalid_argument on length mismatch, non-binary labels,
/// non-finite scores, or a single class present.
double auc_binary(std::span<const double> scores, std::span<const int> labels);

/// Unweighted mean over classes of one-vs-rest binary AUC on each
/// probability column. Rows must lie on the simplex within 1e-9 and every
/// class in [0, C) must be present.
double auc_macro_ovr(const numkit::Matrix& probabilities, std::span<const std::size_t> labels);

/// Bag-level AUC: binary AUC on the class-1 column when C == 2, macro
/// one-vs-rest otherwise.
double auc_from_probabilities(const numkit::Matrix& probabilities, std::span<const std::size_t> labels);

}  // namespace mfmil::metrics
