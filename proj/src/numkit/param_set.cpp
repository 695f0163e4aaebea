#include "mfmil/numkit/param_set.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace mfmil::numkit {

std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::span<double> ParamSet::add(std::string name, std::vector<std::size_t> shape) {
  const std::size_t n = shape_size(shape);
  return add(std::move(name), std::move(shape), std::vector<double>(n, 0.0));
}

std::span<double> ParamSet::add(std::string name, std::vector<std::size_t> shape,
                                std::vector<double> values) {
  if (name.empty()) throw std::invalid_argument("parameter name must be non-empty");
  if (contains(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  if (values.size() != shape_size(shape)) {
    throw std::invalid_argument("parameter '" + name + "': value count does not match shape");
  }
  entries_.push_back(ParamEntry{std::move(name), std::move(shape), std::move(values)});
  return entries_.back().values;
}

std::size_t ParamSet::num_values() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.values.size();
  return n;
}

const ParamEntry* ParamSet::find(std::string_view name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ParamEntry& e) { return e.name == name; });
  return it == entries_.end() ? nullptr : &*it;
}

bool ParamSet::contains(std::string_view name) const { return find(name) != nullptr; }

std::span<const double> ParamSet::values(std::string_view name) const {
  const ParamEntry* e = find(name);
  if (e == nullptr) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return e->values;
}

std::span<double> ParamSet::values(std::string_view name) {
  const ParamEntry* e = find(name);
  if (e == nullptr) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return const_cast<ParamEntry*>(e)->values;
}

bool ParamSet::congruent(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].shape != other.entries_[i].shape) return false;
  }
  return true;
}

void ParamSet::require_congruent(const ParamSet& other, std::string_view context) const {
  if (!congruent(other)) {
    throw CongruenceError(std::string(context) + ": parameter sets are not congruent");
  }
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, e.shape);
  return out;
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(num_values());
  for (const auto& e : entries_) flat.insert(flat.end(), e.values.begin(), e.values.end());
  return flat;
}

void ParamSet::assign_flat(std::span<const double> flat) {
  if (flat.size() != num_values()) throw std::invalid_argument("assign_flat: size mismatch");
  std::size_t offset = 0;
  for (auto& e : entries_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), e.values.size(), e.values.begin());
    offset += e.values.size();
  }
}

}  // namespace mfmil::numkit
