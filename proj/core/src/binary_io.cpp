#include "podlrom/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "podlrom/error.hpp"

namespace podlrom::io {

void BinaryWriter::bytes(std::span<const std::uint8_t> data) {
  buffer_.insert(buffer_.end(), data.begin(), data.end());
}

void BinaryWriter::magic(std::string_view tag) {
  buffer_.insert(buffer_.end(), tag.begin(), tag.end());
  buffer_.push_back(0);
}

void BinaryWriter::u64(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    buffer_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

void BinaryWriter::f64(double value) { u64(std::bit_cast<std::uint64_t>(value)); }

void BinaryWriter::f64s(std::span<const double> values) {
  buffer_.reserve(buffer_.size() + 8 * values.size());
  for (double v : values) f64(v);
}

void BinaryWriter::str(std::string_view value) {
  u64(value.size());
  buffer_.insert(buffer_.end(), value.begin(), value.end());
}

void BinaryWriter::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(buffer_.data()),
            static_cast<std::streamsize>(buffer_.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

const std::uint8_t* BinaryReader::take(std::size_t n) {
  if (n > remaining()) {
    throw FormatError("truncated file: needed " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", " + std::to_string(remaining()) + " left");
  }
  const std::uint8_t* p = data_.data() + pos_;
  pos_ += n;
  return p;
}

void BinaryReader::expect_magic(std::string_view tag) {
  const std::uint8_t* p = take(tag.size() + 1);
  for (std::size_t i = 0; i < tag.size(); ++i) {
    if (p[i] != static_cast<std::uint8_t>(tag[i])) {
      throw FormatError("bad magic: expected '" + std::string(tag) + "'");
    }
  }
  if (p[tag.size()] != 0) throw FormatError("bad magic: expected '" + std::string(tag) + "'");
}

std::uint64_t BinaryReader::u64() {
  const std::uint8_t* p = take(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> BinaryReader::f64s(std::size_t count) {
  if (count > remaining() / 8) throw FormatError("truncated file: array of " + std::to_string(count) + " doubles");
  std::vector<double> out(count);
  f64s_into(out);
  return out;
}

void BinaryReader::f64s_into(std::span<double> out) {
  if (out.size() > remaining() / 8) {
    throw FormatError("truncated file: array of " + std::to_string(out.size()) + " doubles");
  }
  for (double& v : out) v = f64();
}

std::string BinaryReader::str() {
  const std::uint64_t n = u64();
  if (n > remaining()) throw FormatError("truncated file: string of length " + std::to_string(n));
  const std::uint8_t* p = take(n);
  return std::string(reinterpret_cast<const char*>(p), n);
}

void BinaryReader::expect_end() const {
  if (remaining() != 0) {
    throw FormatError("trailing bytes: " + std::to_string(remaining()) + " unread");
  }
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text) {
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace podlrom::io
