#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace sparta {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

// Appends fixed-width little-endian fields to an in-memory buffer.
class BinaryWriter {
 public:
  void write_u32(std::uint32_t v) { write_raw(&v, sizeof(v)); }
  void write_u64(std::uint64_t v) { write_raw(&v, sizeof(v)); }
  void write_f32(float v) { write_raw(&v, sizeof(v)); }
  void write_f64(double v) { write_raw(&v, sizeof(v)); }

  void write_bytes(const void* data, std::size_t n) { write_raw(data, n); }

  void write_string(const std::string& s) {
    write_u32(static_cast<std::uint32_t>(s.size()));
    write_raw(s.data(), s.size());
  }

  const std::vector<char>& buffer() const { return buf_; }

  void save(const std::filesystem::path& path) const;

 private:
  void write_raw(const void* data, std::size_t n) {
    const char* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }

  std::vector<char> buf_;
};

// Cursor over a fully loaded file. Reads past the end throw with the byte
// offset and the field being read.
class BinaryReader {
 public:
  BinaryReader(std::vector<char> data, std::string source)
      : data_(std::move(data)), source_(std::move(source)) {}

  static BinaryReader from_file(const std::filesystem::path& path);

  std::uint32_t read_u32(const char* field) {
    std::uint32_t v;
    read_raw(&v, sizeof(v), field);
    return v;
  }
  std::uint64_t read_u64(const char* field) {
    std::uint64_t v;
    read_raw(&v, sizeof(v), field);
    return v;
  }
  float read_f32(const char* field) {
    float v;
    read_raw(&v, sizeof(v), field);
    return v;
  }
  double read_f64(const char* field) {
    double v;
    read_raw(&v, sizeof(v), field);
    return v;
  }
  std::string read_string(const char* field);

  void read_bytes(void* out, std::size_t n, const char* field) {
    read_raw(out, n, field);
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& source() const { return source_; }

 private:
  void read_raw(void* out, std::size_t n, const char* field);

  std::vector<char> data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace sparta
