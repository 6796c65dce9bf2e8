#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crtr/errors.hpp"

namespace crtr {

using nlohmann::json;

/// Little-endian binary container: magic bytes, u32 length-prefixed UTF-8
/// JSON header, then a raw payload section.
namespace bio {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("truncated file: expected u32");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_header(std::ostream& os, const char* magic, std::size_t magic_len,
                         const json& header) {
  os.write(magic, static_cast<std::streamsize>(magic_len));
  const std::string h = header.dump();
  write_u32(os, static_cast<std::uint32_t>(h.size()));
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
}

inline json read_header(std::istream& is, const char* magic, std::size_t magic_len,
                        const char* what) {
  std::vector<char> m(magic_len);
  is.read(m.data(), static_cast<std::streamsize>(magic_len));
  if (!is || std::memcmp(m.data(), magic, magic_len) != 0)
    throw std::runtime_error(std::string(what) + ": bad magic bytes");
  const std::uint32_t n = read_u32(is);
  std::string h(n, '\0');
  is.read(h.data(), n);
  if (!is) throw std::runtime_error(std::string(what) + ": truncated header");
  return json::parse(h);
}

inline void write_f32_array(std::ostream& os, const float* data, std::size_t n) {
  // Little-endian 32-bit floats; this build targets little-endian hosts.
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
}

inline void read_f32_array(std::istream& is, float* data, std::size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4));
  if (!is) throw std::runtime_error("truncated file: expected float array");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

}  // namespace bio

}  // namespace crtr
