#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mfmil::numkit {

class FormatError : public std::runtime_error {
 public:
  enum class Kind { Magic, Version, Checksum, Truncated, Malformed, Io };

  FormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Little-endian byte sink.
class ByteWriter {
 public:
  void bytes(std::string_view raw) { buf_.insert(buf_.end(), raw.begin(), raw.end()); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  /// Appends raw f64 values and adds their bytes to the running payload sum.
  void f64_payload(std::span<const double> values) {
    for (double d : values) {
      const auto bits = std::bit_cast<std::uint64_t>(d);
      for (int i = 0; i < 8; ++i) payload_sum_ += (bits >> (8 * i)) & 0xFFu;
      put(bits, 8);
    }
  }
  std::uint64_t payload_sum() const { return payload_sum_; }
  const std::string& buffer() const { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  std::string buf_;
  std::uint64_t payload_sum_ = 0;
};

/// Little-endian byte source; every read is bounds-checked.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  void f64_payload(std::span<double> out) {
    need(out.size() * 8);
    for (double& d : out) {
      const std::uint64_t bits = get(8);
      for (int i = 0; i < 8; ++i) payload_sum_ += (bits >> (8 * i)) & 0xFFu;
      d = std::bit_cast<double>(bits);
    }
  }
  std::uint64_t payload_sum() const { return payload_sum_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError(FormatError::Kind::Truncated, "unexpected end of file");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::uint64_t payload_sum_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mfmil::numkit
