#pragma once

#include <cstddef>
#include <string>

#include "mfmil/numkit/linalg.hpp"

namespace mfmil::milmodels {

/// One slide: P instance feature vectors (rows) of width d, with a bag label.
struct Bag {
  numkit::Matrix features;
  std::size_t label = 0;
  std::string id;

  std::size_t num_instances() const { return features.rows; }
  std::size_t dim() const { return features.cols; }

  bool operator==(const Bag&) const = default;
};

}  // namespace mfmil::milmodels
