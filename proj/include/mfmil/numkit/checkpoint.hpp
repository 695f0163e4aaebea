#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mfmil/numkit/binary_io.hpp"
#include "mfmil/numkit/param_set.hpp"

namespace mfmil::numkit {

// MFMA checkpoint layout (little-endian):
//   "MFMA" | version u32 | entry count u32
//   per entry: name length u16 | UTF-8 name | rank u8 | dims u32 x rank | f64 payload
//   checksum u64 = sum of all f64 payload bytes, mod 2^64
inline constexpr std::string_view kCheckpointMagic = "MFMA";
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const ParamSet& params);
ParamSet decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_checkpoint(const std::filesystem::path& path);

}  // namespace mfmil::numkit
