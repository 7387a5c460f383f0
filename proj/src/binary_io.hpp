#ifndef CATXL_SRC_BINARY_IO_HPP
#define CATXL_SRC_BINARY_IO_HPP

// Little-endian fixed-width column I/O shared by the binary event and store
// formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "catxl/common.hpp"

namespace catxl::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void write_pod(std::ostream& os, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void write_column(std::ostream& os, std::span<const T> values) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size_bytes()));
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T read_pod(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw ParseError("binary file truncated");
  return value;
}

template <typename T>
std::vector<T> read_column(std::istream& is, std::size_t count) {
  std::vector<T> values(count);
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(T)));
  if (!is) throw ParseError("binary file truncated");
  return values;
}

inline std::string read_string(std::istream& is) {
  const auto n = read_pod<std::uint32_t>(is);
  if (n > (1u << 20)) throw ParseError("binary file: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw ParseError("binary file truncated");
  return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[9], const char* what) {
  char buf[8];
  is.read(buf, 8);
  if (!is || std::memcmp(buf, magic, 8) != 0) {
    throw ParseError(std::string("not a ") + what + " file (bad magic)");
  }
}

}  // namespace catxl::detail

#endif  // CATXL_SRC_BINARY_IO_HPP
