#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfmil/dataio/dataset.hpp"
#include "mfmil/numkit/rng.hpp"

namespace mfmil::dataio {

using milmodels::Bag;

void SynthConfig::validate() const {
  if (d < 1) throw std::invalid_argument("synthetic data: d must be >= 1");
  if (classes < 2 || classes > 255) throw std::invalid_argument("synthetic data: classes must lie in [2, 255]");
  if (classes - 1 > d) throw std::invalid_argument("synthetic data: need d >= classes - 1 for orthogonal class directions");
  for (const auto* counts : {&train_counts, &val_counts, &test_counts}) {
    if (counts->size() != classes) throw std::invalid_argument("synthetic data: per-class counts must have one entry per class");
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (train_counts[c] == 0) throw std::invalid_argument("synthetic data: every class needs training bags");
  }
  if (bag_size_min < 1 || bag_size_max < bag_size_min) throw std::invalid_argument("synthetic data: invalid bag size range");
  if (!(witness_rate > 0.0 && witness_rate <= 1.0)) throw std::invalid_argument("synthetic data: witness_rate must lie in (0, 1]");
  if (!(separation >= 0.0) || !std::isfinite(separation)) throw std::invalid_argument("synthetic data: separation must be finite and >= 0");
}

void BagDataset::validate() const {
  if (num_classes < 2) throw std::invalid_argument("dataset: need at least two classes");
  std::vector<bool> seen(num_classes, false);
  for (const auto* split : {&train, &val, &test}) {
    for (const Bag& bag : *split) {
      if (bag.num_instances() == 0) throw std::invalid_argument("dataset: bag '" + bag.id + "' is empty");
      if (bag.dim() != d) throw std::invalid_argument("dataset: bag '" + bag.id + "' has the wrong feature width");
      if (bag.label >= num_classes) throw std::invalid_argument("dataset: bag '" + bag.id + "' label out of range");
      for (double v : bag.features.data) {
        if (!std::isfinite(v)) throw std::invalid_argument("dataset: bag '" + bag.id + "' has non-finite features");
      }
    }
  }
  for (const Bag& bag : train) seen[bag.label] = true;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (!seen[c]) throw std::invalid_argument("dataset: class " + std::to_string(c) + " missing from train split");
  }
}

std::vector<std::vector<double>> class_directions(const SynthConfig& cfg) {
  cfg.validate();
  numkit::RngStream rng = numkit::RngStream(cfg.data_seed).split("directions");
  std::vector<std::vector<double>> dirs;
  while (dirs.size() < cfg.classes - 1) {
    std::vector<double> u = rng.gauss(cfg.d);
    for (const auto& prev : dirs) {
      const double proj = numkit::dot(u, prev);
      numkit::axpy(-proj, prev, u);
    }
    const double norm = std::sqrt(numkit::dot(u, u));
    if (norm < 1e-8) continue;  // degenerate draw, try again
    for (double& x : u) x /= norm;
    dirs.push_back(std::move(u));
  }
  return dirs;
}

namespace {

std::size_t witness_count(double rate, std::size_t p) {
  const double exact = rate * static_cast<double>(p);
  const double nearest = std::round(exact);
  const double k = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact) ? nearest : std::ceil(exact);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, p);
}

std::vector<Bag> generate_split(const SynthConfig& cfg, const std::vector<std::vector<double>>& dirs,
                                const std::vector<std::size_t>& counts, std::string_view name) {
  numkit::RngStream rng = numkit::RngStream(cfg.data_seed).split(name);
  std::vector<Bag> bags;
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    for (std::size_t b = 0; b < counts[c]; ++b) {
      const std::size_t p = cfg.bag_size_min + rng.uniform_index(cfg.bag_size_max - cfg.bag_size_min + 1);
      Bag bag;
      bag.label = c;
      bag.features = numkit::Matrix(p, cfg.d, rng.gauss(p * cfg.d));
      if (c > 0) {
        const auto positions = rng.permutation(p);
        const std::size_t witnesses = witness_count(cfg.witness_rate, p);
        for (std::size_t w = 0; w < witnesses; ++w) {
          numkit::axpy(cfg.separation, dirs[c - 1], bag.features.row(positions[w]));
        }
      }
      bags.push_back(std::move(bag));
    }
  }
  const auto order = rng.permutation(bags.size());
  std::vector<Bag> shuffled;
  shuffled.reserve(bags.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.push_back(std::move(bags[order[i]]));
    shuffled.back().id = std::string(name) + "-" + std::to_string(i);
  }
  return shuffled;
}

}  // namespace

BagDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto dirs = class_directions(cfg);
  BagDataset ds;
  ds.d = cfg.d;
  ds.num_classes = cfg.classes;
  ds.train = generate_split(cfg, dirs, cfg.train_counts, "train");
  ds.val = generate_split(cfg, dirs, cfg.val_counts, "val");
  ds.test = generate_split(cfg, dirs, cfg.test_counts, "test");
  ds.provenance = "synthetic(seed=" + std::to_string(cfg.data_seed) + ")";
  return ds;
}

}  // namespace mfmil::dataio
