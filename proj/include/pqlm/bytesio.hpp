#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pqlm/common.hpp"

namespace pqlm {

// Little-endian scalar serialization shared by the binary artifact formats.
struct ByteWriter {
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v & 0xFF));
    bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void f32(float v);
  void f64(double v);
  void raw(const void* data, std::size_t n);
  void str16(const std::string& s); // u16 length + bytes
};

// Bounds-checked sequential reader. Running past the end raises FormatError
// tagged with the artifact name.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size, std::string what)
      : data_(data), size_(size), what_(std::move(what)) {}
  ByteReader(const std::vector<std::uint8_t>& bytes, std::string what)
      : ByteReader(bytes.data(), bytes.size(), std::move(what)) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  const std::uint8_t* raw(std::size_t n);
  std::string str16();

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n);

  const std::uint8_t* data_;
  std::size_t size_;
  std::string what_;
  std::size_t pos_ = 0;
};

// CRC-32, IEEE polynomial, as used by the artifact trailers.
std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t len);

}  // namespace pqlm
