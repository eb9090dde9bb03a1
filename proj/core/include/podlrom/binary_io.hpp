#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace podlrom::io {

// Little-endian byte sink. All multi-byte values are written LSB first
// regardless of the host byte order.
class BinaryWriter {
public:
  void bytes(std::span<const std::uint8_t> data);
  void magic(std::string_view tag);  // writes tag plus a trailing NUL
  void u64(std::uint64_t value);
  void f64(double value);
  void f64s(std::span<const double> values);
  void str(std::string_view value);  // u64 length + raw bytes

  const std::vector<std::uint8_t>& buffer() const { return buffer_; }
  void save(const std::filesystem::path& path) const;

private:
  std::vector<std::uint8_t> buffer_;
};

class BinaryReader {
public:
  explicit BinaryReader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}

  // Throws FormatError unless the next bytes are tag + NUL.
  void expect_magic(std::string_view tag);
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s(std::size_t count);
  void f64s_into(std::span<double> out);
  std::string str();

  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const;

private:
  const std::uint8_t* take(std::size_t n);

  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// Whole-file read; throws InvalidArgument naming the path when missing.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// FNV-1a, 64 bit. Used for config hashes in run manifests.
std::uint64_t fnv1a64(std::span<const std::uint8_t> data);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace podlrom::io
