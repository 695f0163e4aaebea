#include <limits>

#include "mfmil/dataio/dataset.hpp"
#include "mfmil/numkit/binary_io.hpp"

namespace mfmil::dataio {

using milmodels::Bag;
using numkit::FormatError;

namespace {
constexpr std::string_view kMagic = "MBAG";
}

std::string encode_bags(const BagDataset& ds) {
  if (ds.num_classes > std::numeric_limits<std::uint8_t>::max() + 1u) {
    throw std::invalid_argument("MBAG: too many classes for a u8 label");
  }
  numkit::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kBagFileVersion);
  w.u32(static_cast<std::uint32_t>(ds.d));
  w.u32(static_cast<std::uint32_t>(ds.num_classes));
  w.u32(static_cast<std::uint32_t>(ds.size()));
  auto put_split = [&](const std::vector<Bag>& bags, Split tag) {
    for (const Bag& bag : bags) {
      if (bag.dim() != ds.d) throw std::invalid_argument("MBAG: bag '" + bag.id + "' has the wrong feature width");
      if (bag.id.size() > std::numeric_limits<std::uint16_t>::max()) throw std::invalid_argument("MBAG: bag id too long");
      w.u8(static_cast<std::uint8_t>(tag));
      w.u8(static_cast<std::uint8_t>(bag.label));
      w.u16(static_cast<std::uint16_t>(bag.id.size()));
      w.bytes(bag.id);
      w.u32(static_cast<std::uint32_t>(bag.num_instances()));
      w.f64_payload(bag.features.data);
    }
  };
  put_split(ds.train, Split::Train);
  put_split(ds.val, Split::Val);
  put_split(ds.test, Split::Test);
  w.u64(w.payload_sum());
  return w.buffer();
}

BagDataset decode_bags(std::string_view bytes) {
  numkit::ByteReader r(bytes);
  if (r.bytes(4) != kMagic) throw FormatError(FormatError::Kind::Magic, "not an MBAG file");
  const std::uint32_t version = r.u32();
  if (version != kBagFileVersion) {
    throw FormatError(FormatError::Kind::Version, "unsupported MBAG version " + std::to_string(version));
  }
  BagDataset ds;
  ds.d = r.u32();
  ds.num_classes = r.u32();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t tag = r.u8();
    Bag bag;
    bag.label = r.u8();
    const std::uint16_t id_len = r.u16();
    bag.id = std::string(r.bytes(id_len));
    const std::uint32_t p = r.u32();
    if (ds.d != 0 && p > r.remaining() / 8 / ds.d) throw FormatError(FormatError::Kind::Truncated, "bag '" + bag.id + "' is truncated");
    bag.features = numkit::Matrix(p, ds.d);
    r.f64_payload(bag.features.data);
    switch (tag) {
      case static_cast<std::uint8_t>(Split::Train): ds.train.push_back(std::move(bag)); break;
      case static_cast<std::uint8_t>(Split::Val): ds.val.push_back(std::move(bag)); break;
      case static_cast<std::uint8_t>(Split::Test): ds.test.push_back(std::move(bag)); break;
      default: throw FormatError(FormatError::Kind::Malformed, "unknown split tag " + std::to_string(tag));
    }
  }
  const std::uint64_t computed = r.payload_sum();
  if (r.u64() != computed) throw FormatError(FormatError::Kind::Checksum, "MBAG checksum mismatch");
  if (r.remaining() != 0) throw FormatError(FormatError::Kind::Malformed, "trailing bytes after checksum");
  try {
    ds.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::Malformed, e.what());
  }
  return ds;
}

void write_bags(const BagDataset& ds, const std::filesystem::path& path) {
  numkit::write_file(path, encode_bags(ds));
}

BagDataset read_bags(const std::filesystem::path& path) {
  BagDataset ds = decode_bags(numkit::read_file(path));
  ds.provenance = "file(" + path.string() + ")";
  return ds;
}

}  // namespace mfmil::dataio
