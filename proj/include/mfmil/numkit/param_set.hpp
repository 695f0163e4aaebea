#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfmil::numkit {

/// Thrown when two parameter sets (or a parameter set and a model layout)
/// do not share the same name/shape sequence.
class CongruenceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ParamEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;  // row-major

  bool operator==(const ParamEntry&) const = default;
};

std::size_t shape_size(std::span<const std::size_t> shape);

/// Ordered collection of named float64 arrays. Iteration order is insertion
/// order; names are unique; every entry holds exactly prod(shape) values.
class ParamSet {
 public:
  ParamSet() = default;

  /// Appends a zero-filled entry and returns its values.
  std::span<double> add(std::string name, std::vector<std::size_t> shape);
  std::span<double> add(std::string name, std::vector<std::size_t> shape, std::vector<double> values);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  /// Total number of scalar values across all entries.
  std::size_t num_values() const;

  const ParamEntry& entry(std::size_t i) const { return entries_.at(i); }
  ParamEntry& entry(std::size_t i) { return entries_.at(i); }
  const std::vector<ParamEntry>& entries() const { return entries_; }

  bool contains(std::string_view name) const;
  std::span<const double> values(std::string_view name) const;
  std::span<double> values(std::string_view name);

  /// Same name/shape sequence.
  bool congruent(const ParamSet& other) const;
  void require_congruent(const ParamSet& other, std::string_view context) const;

  /// Zero-valued copy with the same layout.
  ParamSet zeros_like() const;

  /// Concatenation of all entry values in entry order.
  std::vector<double> flatten() const;
  /// Inverse of flatten on a congruent layout.
  void assign_flat(std::span<const double> flat);

  bool operator==(const ParamSet& other) const = default;

 private:
  const ParamEntry* find(std::string_view name) const;
  std::vector<ParamEntry> entries_;
};

}  // namespace mfmil::numkit
