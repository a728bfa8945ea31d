#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "tnce/error.h"

namespace tnce {

// Little-endian fixed-width primitives for the dataset/checkpoint formats.
// Explicit byte order so files are identical across hosts.

inline void write_u8(std::ostream& out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void write_f64(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  write_u64(out, bits);
}

inline void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint8_t read_u8(std::istream& in, const char* what) {
  int c = in.get();
  if (c == EOF) throw CorruptionError(std::string("unexpected end of file reading ") + what);
  return static_cast<std::uint8_t>(c);
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
  char b[4];
  in.read(b, 4);
  if (in.gcount() != 4)
    throw CorruptionError(std::string("unexpected end of file reading ") + what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
  char b[8];
  in.read(b, 8);
  if (in.gcount() != 8)
    throw CorruptionError(std::string("unexpected end of file reading ") + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

inline double read_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(read_u64(in, what));
}

inline std::string read_str(std::istream& in, const char* what,
                            std::uint32_t max_len = 1u << 20) {
  std::uint32_t len = read_u32(in, what);
  if (len > max_len)
    throw CorruptionError(std::string("string length implausible reading ") + what);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (in.gcount() != static_cast<std::streamsize>(len))
    throw CorruptionError(std::string("unexpected end of file reading ") + what);
  return s;
}

}  // namespace tnce
