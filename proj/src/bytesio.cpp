#include "pqlm/bytesio.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>

namespace pqlm {

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::raw(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  bytes.insert(bytes.end(), p, p + n);
}

void ByteWriter::str16(const std::string& s) {
  if (s.size() > 0xFFFF) throw std::invalid_argument("str16: string longer than 65535 bytes");
  u16(static_cast<std::uint16_t>(s.size()));
  raw(s.data(), s.size());
}

void ByteReader::need(std::size_t n) {
  if (remaining() < n) throw FormatError(what_ + ": truncated");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
  need(2);
  const std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

const std::uint8_t* ByteReader::raw(std::size_t n) {
  need(n);
  const std::uint8_t* p = data_ + pos_;
  pos_ += n;
  return p;
}

std::string ByteReader::str16() {
  const std::uint16_t len = u16();
  const std::uint8_t* p = raw(len);
  return std::string(reinterpret_cast<const char*>(p), len);
}

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t len) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0UL, nullptr, 0), reinterpret_cast<const Bytef*>(data),
            static_cast<uInt>(len)));
}

}  // namespace pqlm
