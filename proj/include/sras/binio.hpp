#ifndef SRAS_BINIO_HPP_
#define SRAS_BINIO_HPP_

// Little-endian byte encoding and atomic file output for the binary formats.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "sras/errors.hpp"

namespace sras::binio {

class ByteWriter {
 public:
  void bytes(std::string_view raw) { buf_.insert(buf_.end(), raw.begin(), raw.end()); }

  template <class U>
    requires std::is_unsigned_v<U>
  void uint(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((value >> (8 * i)) & 0xffu));
    }
  }

  void f32(float value) { uint(std::bit_cast<std::uint32_t>(value)); }

  const std::vector<char>& buffer() const noexcept { return buf_; }
  std::size_t size() const noexcept { return buf_.size(); }

 private:
  std::vector<char> buf_;
};

// Every read names the field it is decoding so truncation and corruption
// errors point at the offending part of the file.
class ByteReader {
 public:
  ByteReader(std::string_view data, std::string source)
      : data_(data), source_(std::move(source)) {}

  std::string_view bytes(std::size_t n, const char* field) {
    need(n, field);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <class U>
    requires std::is_unsigned_v<U>
  U uint(const char* field) {
    need(sizeof(U), field);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i]))
               << (8 * i);
    }
    pos_ += sizeof(U);
    return value;
  }

  float f32(const char* field) {
    return std::bit_cast<float>(uint<std::uint32_t>(field));
  }

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  const std::string& source() const noexcept { return source_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(source_ + " at offset " + std::to_string(pos_) + ": " +
                      what);
  }

 private:
  void need(std::size_t n, const char* field) const {
    if (data_.size() - pos_ < n) {
      fail(std::string("truncated while reading ") + field);
    }
  }

  std::string_view data_;
  std::string source_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Writes next to the target and renames into place, so a failure never
// leaves a partial file at `path`.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot move output into place at '" + path.string() + "'");
  }
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::vector<char>& contents) {
  write_file_atomic(path, std::string_view(contents.data(), contents.size()));
}

}  // namespace sras::binio

#endif  // SRAS_BINIO_HPP_
