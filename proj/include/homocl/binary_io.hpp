#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "homocl/common.hpp"

// Little-endian encoding helpers shared by the dataset, checkpoint and
// feature-table formats.
namespace homocl::io {

inline void write_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!os) throw std::runtime_error("write failed");
}

inline void write_magic(std::ostream& os, std::string_view magic) { write_bytes(os, magic.data(), magic.size()); }

template <typename U>
inline void write_le(std::ostream& os, U value) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  write_bytes(os, buf, sizeof(U));
}

inline void write_u8(std::ostream& os, std::uint8_t v) { write_le(os, v); }
inline void write_u32(std::ostream& os, std::uint32_t v) { write_le(os, v); }
inline void write_u64(std::ostream& os, std::uint64_t v) { write_le(os, v); }
inline void write_f32(std::ostream& os, float v) { write_le(os, std::bit_cast<std::uint32_t>(v)); }
inline void write_f64(std::ostream& os, double v) { write_le(os, std::bit_cast<std::uint64_t>(v)); }

inline void write_f32_array(std::ostream& os, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    write_bytes(os, values.data(), values.size_bytes());
  } else {
    for (float v : values) write_f32(os, v);
  }
}

/// Reader that reports truncation distinctly from other format errors.
class Reader {
 public:
  Reader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}

  void read_bytes(void* out, std::size_t n) {
    is_.read(static_cast<char*>(out), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) throw TruncatedFileError(what_ + ": truncated file");
  }

  void expect_magic(std::string_view magic) {
    std::string got(magic.size(), '\0');
    is_.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (static_cast<std::size_t>(is_.gcount()) != magic.size() || got != magic)
      throw FormatError(what_ + ": bad magic (expected \"" + std::string(magic) + "\")");
  }

  template <typename U>
  U read_le() {
    unsigned char buf[sizeof(U)];
    read_bytes(buf, sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
  }

  std::uint8_t u8() { return read_le<std::uint8_t>(); }
  std::uint32_t u32() { return read_le<std::uint32_t>(); }
  std::uint64_t u64() { return read_le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  void f32_array(std::span<float> out) {
    if constexpr (std::endian::native == std::endian::little) {
      read_bytes(out.data(), out.size_bytes());
    } else {
      for (float& v : out) v = f32();
    }
  }

  /// True when no bytes remain.
  bool at_end() {
    return is_.peek() == std::char_traits<char>::eof();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw FormatError(what_ + ": " + msg); }

 private:
  std::istream& is_;
  std::string what_;
};

}  // namespace homocl::io
