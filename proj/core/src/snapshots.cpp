#include "podlrom/snapshots.hpp"

#include <string>

#include "podlrom/binary_io.hpp"
#include "podlrom/error.hpp"

namespace podlrom {

ChannelLayout::ChannelLayout(std::vector<std::size_t> rows_per_channel)
    : rows_(std::move(rows_per_channel)) {
  offsets_.reserve(rows_.size());
  for (std::size_t r : rows_) {
    if (r == 0) throw InvalidArgument("channel with zero rows");
    offsets_.push_back(total_);
    total_ += r;
  }
}

void SnapshotMatrix::validate() const {
  if (layout.channels() == 0) throw InvalidArgument("snapshot matrix has no channels");
  if (static_cast<std::size_t>(data.rows()) != layout.total()) {
    throw InvalidArgument("snapshot rows " + std::to_string(data.rows()) +
                          " do not match channel layout total " + std::to_string(layout.total()));
  }
  if (samples() != n_train * n_t) {
    throw InvalidArgument("snapshot columns " + std::to_string(samples()) + " != n_train * n_t = " +
                          std::to_string(n_train * n_t));
  }
  if (!data.allFinite()) throw InvalidArgument("snapshot matrix contains NaN or Inf");
}

void Dataset::validate() const {
  snapshots.validate();
  if (parameters.samples() != snapshots.samples()) {
    throw InvalidArgument("parameter matrix has " + std::to_string(parameters.samples()) +
                          " columns, snapshot matrix has " + std::to_string(snapshots.samples()));
  }
  if (parameters.data.rows() < 1) throw InvalidArgument("parameter matrix has no time row");
  if (!parameters.data.allFinite()) throw InvalidArgument("parameter matrix contains NaN or Inf");
}

std::vector<std::uint8_t> encode_pdrs(const Dataset& dataset) {
  dataset.validate();
  const auto& s = dataset.snapshots;
  io::BinaryWriter w;
  w.magic("PDRS1");
  w.u64(static_cast<std::uint64_t>(s.data.rows()));
  w.u64(static_cast<std::uint64_t>(s.data.cols()));
  w.u64(s.layout.channels());
  for (std::size_t r : s.layout.rows_per_channel()) w.u64(r);
  w.u64(dataset.parameters.n_params());
  w.u64(s.n_train);
  w.u64(s.n_t);
  w.f64s(std::span(s.data.data(), static_cast<std::size_t>(s.data.size())));
  const auto& m = dataset.parameters.data;
  w.f64s(std::span(m.data(), static_cast<std::size_t>(m.size())));
  return w.buffer();
}

Dataset decode_pdrs(std::vector<std::uint8_t> bytes) {
  io::BinaryReader r(std::move(bytes));
  r.expect_magic("PDRS1");
  const std::uint64_t rows = r.u64();
  const std::uint64_t cols = r.u64();
  const std::uint64_t d = r.u64();
  if (d == 0 || d > 64) throw FormatError("implausible channel count " + std::to_string(d));
  std::vector<std::size_t> per_channel(d);
  for (auto& v : per_channel) v = r.u64();
  const std::uint64_t n_mu = r.u64();
  const std::uint64_t n_train = r.u64();
  const std::uint64_t n_t = r.u64();

  Dataset out;
  out.snapshots.layout = ChannelLayout(per_channel);
  if (out.snapshots.layout.total() != rows) throw FormatError("channel rows do not sum to row count");
  if (n_train * n_t != cols) throw FormatError("n_train * n_t does not match column count");
  if (rows * cols > r.remaining() / 8) throw FormatError("truncated file: snapshot block");
  out.snapshots.n_train = n_train;
  out.snapshots.n_t = n_t;
  out.snapshots.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  r.f64s_into(std::span(out.snapshots.data.data(), rows * cols));
  if ((n_mu + 1) * cols > r.remaining() / 8) throw FormatError("truncated file: parameter block");
  out.parameters.data.resize(static_cast<Eigen::Index>(n_mu + 1), static_cast<Eigen::Index>(cols));
  r.f64s_into(std::span(out.parameters.data.data(), (n_mu + 1) * cols));
  r.expect_end();
  return out;
}

void write_pdrs(const std::filesystem::path& path, const Dataset& dataset) {
  io::BinaryWriter w;
  w.bytes(encode_pdrs(dataset));
  w.save(path);
}

Dataset read_pdrs(const std::filesystem::path& path) {
  return decode_pdrs(io::read_file(path));
}

}  // namespace podlrom
