#pragma once

// Little-endian binary container helpers shared by every on-disk format.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "msr/error.hpp"

namespace msr::binio {

template <typename T>
void put(std::ostream& os, T value) {
  static_assert(std::is_arithmetic_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(bytes, sizeof(T));
}

template <typename T>
void put_span(std::ostream& os, std::span<const T> values) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (T v : values) put(os, v);
  }
}

inline void put_magic(std::ostream& os, std::string_view magic) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

template <typename T>
T get(std::istream& is, const char* what) {
  static_assert(std::is_arithmetic_v<T>);
  char bytes[sizeof(T)];
  if (!is.read(bytes, sizeof(T))) throw FormatError(std::string("truncated file while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename T>
void get_span(std::istream& is, std::span<T> out, const char* what) {
  if (!is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size_bytes())))
    throw FormatError(std::string("truncated file while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) {
    for (T& v : out) {
      char* b = reinterpret_cast<char*>(&v);
      std::reverse(b, b + sizeof(T));
    }
  }
}

inline void expect_magic(std::istream& is, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!is.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic)
    throw FormatError("bad magic: expected " + std::string(magic));
}

inline bool at_end(std::istream& is) {
  return is.peek() == std::char_traits<char>::eof();
}

}  // namespace msr::binio
