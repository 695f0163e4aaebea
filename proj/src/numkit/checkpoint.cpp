#include "mfmil/numkit/checkpoint.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace mfmil::numkit {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw FormatError(FormatError::Kind::Io, "write to '" + path.string() + "' failed");
}

std::string encode_checkpoint(const ParamSet& params) {
  ByteWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& e : params.entries()) {
    if (e.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("parameter name too long for checkpoint: " + e.name);
    }
    if (e.shape.size() > std::numeric_limits<std::uint8_t>::max()) {
      throw std::invalid_argument("parameter rank too large for checkpoint: " + e.name);
    }
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.bytes(e.name);
    w.u8(static_cast<std::uint8_t>(e.shape.size()));
    for (std::size_t dim : e.shape) {
      if (dim > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("dimension too large for checkpoint: " + e.name);
      }
      w.u32(static_cast<std::uint32_t>(dim));
    }
    w.f64_payload(e.values);
  }
  w.u64(w.payload_sum());
  return w.buffer();
}

ParamSet decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4) != kCheckpointMagic) throw FormatError(FormatError::Kind::Magic, "not an MFMA checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatError::Kind::Version,
                      "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  ParamSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    std::string name(r.bytes(name_len));
    const std::uint8_t rank = r.u8();
    std::vector<std::size_t> shape(rank);
    for (auto& dim : shape) dim = r.u32();
    const std::size_t n = shape_size(shape);
    if (n > r.remaining() / 8) throw FormatError(FormatError::Kind::Truncated, "entry '" + name + "' is truncated");
    std::vector<double> values(n);
    r.f64_payload(values);
    try {
      params.add(std::move(name), std::move(shape), std::move(values));
    } catch (const std::invalid_argument& e) {
      throw FormatError(FormatError::Kind::Malformed, e.what());
    }
  }
  const std::uint64_t computed = r.payload_sum();
  const std::uint64_t stored = r.u64();
  if (stored != computed) throw FormatError(FormatError::Kind::Checksum, "checkpoint checksum mismatch");
  if (r.remaining() != 0) throw FormatError(FormatError::Kind::Malformed, "trailing bytes after checksum");
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params) {
  write_file(path, encode_checkpoint(params));
}

ParamSet load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace mfmil::numkit
