#pragma once

// Little-endian framed binary files: magic, version, payload, FNV-1a checksum
// over everything before it.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>

#include "ppnn/errors.hpp"

namespace ppnn::detail {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class BinaryWriter {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  template <class T>
  void value(T v) {
    bytes(&v, sizeof v);
  }
  void string(std::string_view s) {
    value<std::uint64_t>(s.size());
    bytes(s.data(), s.size());
  }
  void doubles(std::span<const double> v) {
    value<std::uint64_t>(v.size());
    bytes(v.data(), v.size_bytes());
  }

  void write_file(const std::filesystem::path& path) {
    value<std::uint64_t>(fnv1a(buf_));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileFormatError("cannot open " + path.string() + " for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw FileFormatError("write failed: " + path.string());
  }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  // Loads the file and verifies magic, trailing checksum and version.
  BinaryReader(const std::filesystem::path& path, std::string_view magic, std::uint32_t version) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileFormatError("cannot open " + path.string());
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (buf_.size() < magic.size() + sizeof(std::uint32_t) + sizeof(std::uint64_t) ||
        std::string_view(buf_).substr(0, magic.size()) != magic) {
      throw CorruptFile(path.string() + ": not a " + std::string(magic) + " file");
    }
    const std::size_t body = buf_.size() - sizeof(std::uint64_t);
    std::uint64_t stored = 0;
    std::memcpy(&stored, buf_.data() + body, sizeof stored);
    if (stored != fnv1a(std::string_view(buf_).substr(0, body))) {
      throw CorruptFile(path.string() + ": checksum mismatch");
    }
    end_ = body;
    pos_ = magic.size();
    const auto v = value<std::uint32_t>();
    if (v != version) {
      throw VersionMismatch(path.string() + ": format version " + std::to_string(v) +
                            ", expected " + std::to_string(version));
    }
  }

  void bytes(void* p, std::size_t n) {
    if (n > end_ - pos_) throw CorruptFile("truncated file");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <class T>
  T value() {
    T v{};
    bytes(&v, sizeof v);
    return v;
  }
  std::string string() {
    const auto n = value<std::uint64_t>();
    if (n > end_ - pos_) throw CorruptFile("truncated file");
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace ppnn::detail
