#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfmil/milmodels/bag.hpp"
#include "mfmil/training/trainer.hpp"

namespace mfmil::dataio {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

struct SynthConfig {
  std::size_t d = 32;
  std::size_t classes = 2;
  // Per-class bag counts for each split; class 0 is the negative class.
  std::vector<std::size_t> train_counts{100, 100};
  std::vector<std::size_t> val_counts{25, 25};
  std::vector<std::size_t> test_counts{50, 50};
  std::size_t bag_size_min = 20;
  std::size_t bag_size_max = 200;
  double witness_rate = 0.05;
  double separation = 1.0;
  std::uint64_t data_seed = 0;

  void validate() const;
};

/// Bags grouped by split, in file/generation order within each split.
struct BagDataset {
  std::vector<milmodels::Bag> train;
  std::vector<milmodels::Bag> val;
  std::vector<milmodels::Bag> test;
  std::size_t d = 0;
  std::size_t num_classes = 0;
  std::string provenance;  // "synthetic(seed=...)" or "file(path)"

  training::DataSplits splits() const { return {train, val, test}; }
  std::size_t size() const { return train.size() + val.size() + test.size(); }

  /// Checks shared width, label range, and that every class appears in train.
  void validate() const;

  /// Content equality; provenance is not compared.
  bool operator==(const BagDataset& other) const {
    return train == other.train && val == other.val && test == other.test && d == other.d &&
           num_classes == other.num_classes;
  }
};

/// Negative bags: every instance ~ N(0, I). A class-c bag (c >= 1) places
/// ceil(witness_rate * P) witness instances ~ N(separation * u_c, I) at
/// random positions, the rest background. The u_c are orthonormal
/// directions drawn once from data_seed. P ~ U{bag_size_min..bag_size_max}.
BagDataset generate(const SynthConfig& cfg);

/// Unit directions u_1..u_{C-1} used by generate().
std::vector<std::vector<double>> class_directions(const SynthConfig& cfg);

// MBAG file layout (little-endian):
//   "MBAG" | version u32 | d u32 | C u32 | bag count u32
//   per bag: split u8 | label u8 | id length u16 | UTF-8 id | P u32 | P*d f64
//   checksum u64 = sum of all f64 payload bytes, mod 2^64
inline constexpr std::uint32_t kBagFileVersion = 1;

std::string encode_bags(const BagDataset& ds);
/// Throws numkit::FormatError; never returns a partial dataset.
BagDataset decode_bags(std::string_view bytes);

void write_bags(const BagDataset& ds, const std::filesystem::path& path);
BagDataset read_bags(const std::filesystem::path& path);

}  // namespace mfmil::dataio
