#include "mfmil/numkit/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace mfmil::numkit {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed) { reset(); }

void RngStream::reset() {
  std::uint64_t x = seed_;
  for (auto& s : state_) s = splitmix64(x);
  spare_normal_.reset();
}

RngStream RngStream::split(std::string_view label) const {
  if (label.empty()) throw std::invalid_argument("split: label must be non-empty");
  std::uint64_t x = seed_;
  const std::uint64_t mixed_seed = splitmix64(x);
  std::uint64_t y = mixed_seed ^ fnv1a64(label);
  return RngStream(splitmix64(y));
}

RngStream split_stream(const RngStream& parent, std::string_view label) { return parent.split(label); }

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the tail that would bias the modulo.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return static_cast<std::size_t>(r % bound);
}

double RngStream::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::vector<double> RngStream::gauss(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss: n must be at least 1");
  std::vector<double> out(n);
  for (auto& v : out) v = normal();
  return out;
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = uniform_index(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace mfmil::numkit
