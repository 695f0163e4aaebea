#include "mfmil/metrics/auc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mfmil::metrics {

double auc_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc_binary: scores and labels differ in length");
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("auc_binary: labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw std::invalid_argument("auc_binary: non-finite score");
    n_pos += static_cast<std::uint64_t>(labels[i]);
  }
  const std::uint64_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc_binary: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk tie groups in ascending score. Twice the U statistic stays an
  // exact integer: 2 * (pos_in_group * neg_below) + pos_in_group * neg_in_group.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos_group = 0;
    std::uint64_t neg_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos_group : neg_group) += 1;
      ++j;
    }
    twice_u += 2 * pos_group * neg_below + pos_group * neg_group;
    neg_below += neg_group;
    i = j;
  }
  return static_cast<double>(twice_u) / static_cast<double>(2 * n_pos * n_neg);
}

double auc_macro_ovr(const numkit::Matrix& probabilities, std::span<const std::size_t> labels) {
  const std::size_t n = probabilities.rows;
  const std::size_t c = probabilities.cols;
  if (labels.size() != n) throw std::invalid_argument("auc_macro_ovr: probability rows and labels differ in length");
  if (c < 2) throw std::invalid_argument("auc_macro_ovr: need at least two classes");
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = probabilities.row(i);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("auc_macro_ovr: row " + std::to_string(i) + " is not on the simplex");
    }
    if (labels[i] >= c) throw std::invalid_argument("auc_macro_ovr: label out of range");
  }
  std::vector<double> column(n);
  std::vector<int> binary(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    bool present = false;
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = probabilities(i, k);
      binary[i] = labels[i] == k ? 1 : 0;
      present = present || binary[i] == 1;
    }
    if (!present) throw std::invalid_argument("auc_macro_ovr: class " + std::to_string(k) + " is missing");
    sum += auc_binary(column, binary);
  }
  return sum / static_cast<double>(c);
}

double auc_from_probabilities(const numkit::Matrix& probabilities, std::span<const std::size_t> labels) {
  if (probabilities.cols == 2) {
    std::vector<double> column(probabilities.rows);
    std::vector<int> binary(labels.size());
    for (std::size_t i = 0; i < probabilities.rows; ++i) column[i] = probabilities(i, 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] > 1) throw std::invalid_argument("auc: label out of range for two classes");
      binary[i] = static_cast<int>(labels[i]);
    }
    return auc_binary(column, binary);
  }
  return auc_macro_ovr(probabilities, labels);
}

}  // namespace mfmil::metrics
