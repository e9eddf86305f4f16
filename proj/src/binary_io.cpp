#include "sparta/binary_io.hpp"

#include <fstream>
#include <stdexcept>

namespace sparta {

void BinaryWriter::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

BinaryReader BinaryReader::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<char> data(size);
  if (size > 0) {
    in.read(data.data(), static_cast<std::streamsize>(size));
    if (!in) {
      throw std::runtime_error("read failed: " + path.string());
    }
  }
  return BinaryReader(std::move(data), path.string());
}

std::string BinaryReader::read_string(const char* field) {
  const std::uint32_t len = read_u32(field);
  std::string s(len, '\0');
  read_raw(s.data(), len, field);
  return s;
}

void BinaryReader::read_raw(void* out, std::size_t n, const char* field) {
  if (pos_ + n > data_.size()) {
    throw std::runtime_error(source_ + ": truncated at offset " +
                             std::to_string(pos_) + " while reading " + field +
                             " (" + std::to_string(n) + " bytes needed, " +
                             std::to_string(data_.size() - pos_) +
                             " available)");
  }
  std::memcpy(out, data_.data() + pos_, n);
  pos_ += n;
}

}  // namespace sparta
