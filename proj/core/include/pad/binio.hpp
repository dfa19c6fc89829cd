// Little-endian binary serialization helpers.  Writers buffer in memory and
// publish with an atomic rename so partially written artifacts are never
// observed; readers bounds-check every access.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "pad/common.hpp"

namespace pad {

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename T>
  void pod(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    raw(&v, sizeof(T));
  }
  void u8(std::uint8_t v) { pod(v); }
  void u16(std::uint16_t v) { pod(v); }
  void u32(std::uint32_t v) { pod(v); }
  void u64(std::uint64_t v) { pod(v); }
  void f32(float v) { pod(v); }
  void f64(double v) { pod(v); }
  void str(const std::string& s) {
    if (s.size() > 0xffffffffu) fail(ErrorKind::io, "string too long");
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }

  const std::vector<unsigned char>& bytes() const { return buf_; }

  // Write to tmp file in the destination directory, then rename into place.
  void commit(const std::filesystem::path& path) const;

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> data) : buf_(std::move(data)) {}

  static ByteReader from_file(const std::filesystem::path& path);

  void raw(void* p, std::size_t n) {
    if (pos_ + n > buf_.size()) fail(ErrorKind::io, "truncated binary input");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T pod() {
    static_assert(std::is_trivially_copyable_v<T>);
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  std::uint8_t u8() { return pod<std::uint8_t>(); }
  std::uint16_t u16() { return pod<std::uint16_t>(); }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  float f32() { return pod<float>(); }
  double f64() { return pod<double>(); }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  bool at_end() const { return pos_ == buf_.size(); }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
};

void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace pad
