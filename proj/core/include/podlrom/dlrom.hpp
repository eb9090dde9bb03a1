#pragma once

// POD-DL-ROM: a convolutional autoencoder and a feedforward network trained
// on POD intrinsic coordinates, plus the training and inference drivers.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podlrom/error.hpp"
#include "podlrom/nn.hpp"
#include "podlrom/rpod.hpp"
#include "podlrom/snapshots.hpp"

namespace podlrom::dlrom {

struct ArchitectureOptions {
  std::size_t kernel = 5;
  std::vector<std::size_t> filters{8, 16, 32, 64};
  std::size_t dfnn_width = 50;
  std::size_t dfnn_depth = 2;
};

// Layer lists of the encoder f_E: (sqrt N, sqrt N, d) -> n, the feedforward
// network phi_DF: (t, mu) -> n and the decoder f_D: n -> (sqrt N, sqrt N, d).
struct Architecture {
  std::size_t pod_rank = 0;   // N, a power of four
  std::size_t channels = 1;   // d
  std::size_t latent = 0;     // n
  std::size_t n_params = 0;   // n_mu (the DFNN also receives time)
  std::vector<nn::LayerSpec> encoder;
  std::vector<nn::LayerSpec> dfnn;
  std::vector<nn::LayerSpec> decoder;

  std::size_t side() const;
  nn::Shape image_shape() const;
  nn::Network encoder_network() const;
  nn::Network dfnn_network() const;
  nn::Network decoder_network() const;
  std::size_t parameter_count() const;

  bool operator==(const Architecture&) const = default;
};

// Encoder: one stride-1 conv then stride-2 convs while the image is larger
// than 1x1 (stride 1 afterwards), ELU after each, then a linear dense layer
// to n. The decoder mirrors it with transposed convolutions.
Architecture default_architecture(std::size_t pod_rank, std::size_t channels, std::size_t latent,
                                  std::size_t n_params, const ArchitectureOptions& options = {});

// Human-readable list of layer shapes that differ between two architectures;
// empty when they match.
std::vector<std::string> architecture_differences(const Architecture& a, const Architecture& b);

// Channel k of sample b fills image (b, :, :, k) row-major from rows
// [kN, (k+1)N) of column b. Throws unless N is a power of four.
nn::Tensor4 coords_to_images(const Eigen::Ref<const Eigen::MatrixXd>& coords, std::size_t pod_rank,
                             std::size_t channels);
Eigen::MatrixXd images_to_coords(const nn::Tensor4& images);

struct NormalizationStats {
  std::vector<double> param_min;  // per row of M, time first
  std::vector<double> param_max;
  std::vector<double> coord_min;  // per channel
  std::vector<double> coord_max;

  bool empty() const { return param_min.empty() || coord_min.empty(); }
  bool operator==(const NormalizationStats&) const = default;
};

// Min-max statistics over the training split. Constant features are
// reported through warn() and later map to 0.
NormalizationStats compute_stats(const Eigen::Ref<const Eigen::MatrixXd>& params,
                                 const Eigen::Ref<const Eigen::MatrixXd>& coords, std::size_t channels);

Eigen::MatrixXd normalize_params(const Eigen::Ref<const Eigen::MatrixXd>& params, const NormalizationStats& stats);
Eigen::MatrixXd denormalize_params(const Eigen::Ref<const Eigen::MatrixXd>& params, const NormalizationStats& stats);
Eigen::MatrixXd normalize_coords(const Eigen::Ref<const Eigen::MatrixXd>& coords, const NormalizationStats& stats);
Eigen::MatrixXd denormalize_coords(const Eigen::Ref<const Eigen::MatrixXd>& coords, const NormalizationStats& stats);

class PodDlRomModel {
public:
  PodDlRomModel() = default;
  PodDlRomModel(Architecture architecture, std::uint64_t seed);
  PodDlRomModel(Architecture architecture, std::vector<double> encoder, std::vector<double> dfnn,
                std::vector<double> decoder);
  PodDlRomModel(const PodDlRomModel& other);
  PodDlRomModel& operator=(const PodDlRomModel& other);

  const Architecture& architecture() const { return architecture_; }
  const nn::Network& encoder() const { return encoder_; }
  const nn::Network& dfnn() const { return dfnn_; }
  const nn::Network& decoder() const { return decoder_; }

  std::vector<double>& encoder_params() { return theta_e_; }
  std::vector<double>& dfnn_params() { return theta_df_; }
  std::vector<double>& decoder_params() { return theta_d_; }
  const std::vector<double>& encoder_params() const { return theta_e_; }
  const std::vector<double>& dfnn_params() const { return theta_df_; }
  const std::vector<double>& decoder_params() const { return theta_d_; }

  // Each call increments encoder_calls().
  nn::Tensor4 encode(const nn::Tensor4& images, nn::ForwardCache* cache = nullptr) const;
  // params: (n_mu + 1) x batch, normalized.
  nn::Tensor4 latent(const Eigen::Ref<const Eigen::MatrixXd>& params, nn::ForwardCache* cache = nullptr) const;
  nn::Tensor4 decode(const nn::Tensor4& latent, nn::ForwardCache* cache = nullptr) const;

  std::size_t encoder_calls() const { return encoder_calls_.load(); }

private:
  void build_networks();

  Architecture architecture_;
  nn::Network encoder_, dfnn_, decoder_;
  std::vector<double> theta_e_, theta_df_, theta_d_;
  mutable std::atomic<std::size_t> encoder_calls_{0};
};

struct LossTerms {
  double total = 0.0;
  double reconstruction = 0.0;  // mean ||x - x~||^2
  double latent = 0.0;          // mean ||e - z||^2
};

struct LossGradient {
  LossTerms terms;
  std::vector<double> encoder;
  std::vector<double> dfnn;
  std::vector<double> decoder;
};

// J = mean_b [ w/2 ||x_b - f_D(phi(m_b))||^2 + (1-w)/2 ||f_E(x_b) - phi(m_b)||^2 ]
// on normalized parameters (n_mu+1 x B) and coordinates (dN x B).
LossGradient loss_and_gradient(const PodDlRomModel& model, const Eigen::Ref<const Eigen::MatrixXd>& params,
                               const Eigen::Ref<const Eigen::MatrixXd>& coords, double omega);
LossTerms evaluate_loss(const PodDlRomModel& model, const Eigen::Ref<const Eigen::MatrixXd>& params,
                        const Eigen::Ref<const Eigen::MatrixXd>& coords, double omega);
Eigen::VectorXd per_sample_loss(const PodDlRomModel& model, const Eigen::Ref<const Eigen::MatrixXd>& params,
                                const Eigen::Ref<const Eigen::MatrixXd>& coords, double omega);

struct TrainConfig {
  double val_fraction = 0.2;  // alpha
  double learning_rate = 1e-3;
  std::size_t batch_size = 40;
  std::size_t max_epochs = 10000;
  std::size_t patience = 500;
  double omega = 0.5;
  std::uint64_t shuffle_seed = 0;
  std::uint64_t init_seed = 0;
  double target_loss = 0.0;  // stop once validation loss <= target (disabled when <= 0)

  void validate(std::size_t samples) const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainingHistory {
  double initial_val_loss = 0.0;  // before the first update
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;     // 0 = initial parameters, e = after epoch e

  bool operator==(const TrainingHistory&) const = default;
};

struct BasisProvenance {
  std::uint64_t rank = 0;
  std::uint64_t oversampling = 0;
  std::uint64_t power_iterations = 0;
  std::uint64_t seed = 0;

  static BasisProvenance of(const rpod::PodBasis& basis);
  bool operator==(const BasisProvenance&) const = default;
};

struct Checkpoint {
  Architecture architecture;
  std::vector<double> encoder;  // best-validation parameters
  std::vector<double> dfnn;
  std::vector<double> decoder;
  NormalizationStats stats;
  nn::AdamState adam_encoder;  // optimizer state when training stopped
  nn::AdamState adam_dfnn;
  nn::AdamState adam_decoder;
  std::size_t epochs = 0;
  double best_val_loss = 0.0;
  TrainingHistory history;
  TrainConfig config;
  BasisProvenance provenance;

  PodDlRomModel model() const;
  bool operator==(const Checkpoint&) const = default;
};

class TrainingDiverged : public NumericalError {
public:
  TrainingDiverged(const std::string& what, TrainingHistory history)
      : NumericalError(what), history_(std::move(history)) {}
  const TrainingHistory& history() const { return history_; }

private:
  TrainingHistory history_;
};

// Normalized, split data and the mutable optimizer state of one run.
struct TrainingState {
  PodDlRomModel model;
  nn::AdamState adam_encoder;
  nn::AdamState adam_dfnn;
  nn::AdamState adam_decoder;
  NormalizationStats stats;
  Eigen::MatrixXd train_params, train_coords;
  Eigen::MatrixXd val_params, val_coords;
  std::vector<std::size_t> train_columns;  // dataset columns of the training split
  std::vector<std::size_t> val_columns;
  TrainConfig config;
  BasisProvenance provenance;
  std::uint64_t shuffle_stream = 0;
};

// Projects, shuffles, splits, normalizes with training-split statistics and
// initializes parameters from config.init_seed.
TrainingState prepare_training(const Dataset& dataset, const rpod::PodBasis& basis,
                               const Architecture& architecture, const TrainConfig& config);

// As prepare_training, but parameters come from the checkpoint and the Adam
// state is reset. Throws InvalidArgument listing differing layer shapes when
// the architectures do not match.
TrainingState warm_start(const Checkpoint& checkpoint, const Dataset& dataset, const rpod::PodBasis& basis,
                         const Architecture& architecture, const TrainConfig& config);

using EpochCallback = std::function<void(std::size_t epoch, double train_loss, double val_loss)>;

// Minibatch Adam with early stopping on the validation loss. The returned
// checkpoint holds the best-validation parameters.
Checkpoint run_training(TrainingState state, const EpochCallback& on_epoch = {});

Checkpoint train(const Dataset& dataset, const rpod::PodBasis& basis, const Architecture& architecture,
                 const TrainConfig& config, const EpochCallback& on_epoch = {});

// DFNN -> decoder -> denormalize; raw parameters (time first) in, intrinsic
// coordinates (dN x cols) out. The encoder is never evaluated.
Eigen::MatrixXd infer_coordinates(const PodDlRomModel& model, const NormalizationStats& stats,
                                  const Eigen::Ref<const Eigen::MatrixXd>& params);

// infer_coordinates followed by lifting through the POD basis.
Eigen::MatrixXd infer(const PodDlRomModel& model, const NormalizationStats& stats, const rpod::PodBasis& basis,
                      const Eigen::Ref<const Eigen::MatrixXd>& params);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::vector<std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace podlrom::dlrom
