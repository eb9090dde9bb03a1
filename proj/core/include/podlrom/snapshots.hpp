#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace podlrom {

// Row partition of a stacked vector field: channel i occupies rows
// [offset(i), offset(i) + rows(i)).
class ChannelLayout {
public:
  ChannelLayout() = default;
  explicit ChannelLayout(std::vector<std::size_t> rows_per_channel);

  std::size_t channels() const { return rows_.size(); }
  std::size_t rows(std::size_t channel) const { return rows_.at(channel); }
  std::size_t offset(std::size_t channel) const { return offsets_.at(channel); }
  std::size_t total() const { return total_; }
  const std::vector<std::size_t>& rows_per_channel() const { return rows_; }

  bool operator==(const ChannelLayout&) const = default;

private:
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

// S: one column per (parameter, time) sample, parameter-major then time.
struct SnapshotMatrix {
  Eigen::MatrixXd data;
  ChannelLayout layout;
  std::size_t n_train = 0;
  std::size_t n_t = 0;

  std::size_t samples() const { return static_cast<std::size_t>(data.cols()); }
  auto channel(std::size_t i) const {
    return data.middleRows(static_cast<Eigen::Index>(layout.offset(i)),
                           static_cast<Eigen::Index>(layout.rows(i)));
  }
  // Throws InvalidArgument when shapes disagree or an entry is not finite.
  void validate() const;
};

// M: row 0 holds sample times, rows 1..n_mu hold the parameter values.
struct ParameterMatrix {
  Eigen::MatrixXd data;

  std::size_t n_params() const { return data.rows() == 0 ? 0 : static_cast<std::size_t>(data.rows()) - 1; }
  std::size_t samples() const { return static_cast<std::size_t>(data.cols()); }
};

struct Dataset {
  SnapshotMatrix snapshots;
  ParameterMatrix parameters;

  std::size_t samples() const { return snapshots.samples(); }
  void validate() const;
};

// PDRS layout: "PDRS1\0", u64 rows, cols, d, rows per channel (d values),
// n_mu, n_train, n_t, then S and M column-major f64, all little endian.
std::vector<std::uint8_t> encode_pdrs(const Dataset& dataset);
Dataset decode_pdrs(std::vector<std::uint8_t> bytes);
void write_pdrs(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_pdrs(const std::filesystem::path& path);

}  // namespace podlrom
