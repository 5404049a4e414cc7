#pragma once

#include <cstdint>
#include <istream>
#include <ostream>

// Little-endian scalar helpers shared by the binary file formats.

namespace packann {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::ios_base::failure("unexpected end of stream");
  return v;
}

inline void write_f32(std::ostream& out, float v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline float read_f32(std::istream& in) {
  float v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::ios_base::failure("unexpected end of stream");
  return v;
}

}  // namespace packann
