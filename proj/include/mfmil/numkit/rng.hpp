#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mfmil::numkit {

/// Seeded pseudo-random stream (xoshiro256**, state expanded from the seed
/// with splitmix64). Sequences are a pure function of the seed.
///
/// Normal draws use the Box-Muller transform on pairs of uniforms
/// u1 in (0,1], u2 in [0,1):
///   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)
/// z0 is returned first and z1 is kept as the next draw.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Child stream whose sequence depends only on (seed(), label).
  RngStream split(std::string_view label) const;

  /// Restarts the sequence from the seed.
  void reset();

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Unbiased integer in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);
  /// Standard normal draw.
  double normal();
  std::vector<double> gauss(std::size_t n);

  /// Fisher-Yates permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  std::optional<double> spare_normal_;
};

/// Same as parent.split(label).
RngStream split_stream(const RngStream& parent, std::string_view label);

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace mfmil::numkit
