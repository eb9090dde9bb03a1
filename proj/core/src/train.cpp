#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "podlrom/dlrom.hpp"
#include "podlrom/random.hpp"

namespace podlrom::dlrom {
namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, std::span<const std::size_t> columns) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(columns[j]));
  return out;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_compatible(const Dataset& dataset, const rpod::PodBasis& basis, const Architecture& arch) {
  dataset.validate();
  if (!(basis.layout() == dataset.snapshots.layout)) {
    throw InvalidArgument("basis channel layout does not match the snapshot matrix");
  }
  if (arch.pod_rank != basis.rank() || arch.channels != basis.channel_count()) {
    throw InvalidArgument("architecture expects N = " + std::to_string(arch.pod_rank) + ", d = " +
                          std::to_string(arch.channels) + " but the basis has N = " + std::to_string(basis.rank()) +
                          ", d = " + std::to_string(basis.channel_count()));
  }
  if (arch.n_params != dataset.parameters.n_params()) {
    throw InvalidArgument("architecture expects " + std::to_string(arch.n_params) + " parameters, dataset has " +
                          std::to_string(dataset.parameters.n_params()));
  }
}

TrainingState split_and_normalize(const Dataset& dataset, const rpod::PodBasis& basis, const Architecture& arch,
                                  const TrainConfig& config) {
  check_compatible(dataset, basis, arch);
  const std::size_t ns = dataset.samples();
  config.validate(ns);

  const Eigen::MatrixXd coords = rpod::project(basis, dataset.snapshots.data);
  std::vector<std::size_t> perm(ns);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(config.shuffle_seed);
  rng.shuffle(perm);
  const auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(ns)));
  if (n_val == 0 || n_val >= ns) {
    throw InvalidArgument("split fraction " + std::to_string(config.val_fraction) + " leaves an empty split of " +
                          std::to_string(ns) + " samples");
  }

  TrainingState s;
  s.config = config;
  s.provenance = BasisProvenance::of(basis);
  s.train_columns.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_val));
  s.val_columns.assign(perm.end() - static_cast<std::ptrdiff_t>(n_val), perm.end());

  const Eigen::MatrixXd train_p = gather(dataset.parameters.data, s.train_columns);
  const Eigen::MatrixXd train_c = gather(coords, s.train_columns);
  s.stats = compute_stats(train_p, train_c, arch.channels);
  s.train_params = normalize_params(train_p, s.stats);
  s.train_coords = normalize_coords(train_c, s.stats);
  s.val_params = normalize_params(gather(dataset.parameters.data, s.val_columns), s.stats);
  s.val_coords = normalize_coords(gather(coords, s.val_columns), s.stats);
  s.shuffle_stream = mix(config.shuffle_seed);
  return s;
}

void reset_optimizers(TrainingState& s) {
  const nn::AdamHyper hyper{s.config.learning_rate};
  s.adam_encoder = nn::AdamState::zeros(s.model.encoder_params().size(), hyper);
  s.adam_dfnn = nn::AdamState::zeros(s.model.dfnn_params().size(), hyper);
  s.adam_decoder = nn::AdamState::zeros(s.model.decoder_params().size(), hyper);
}

}  // namespace

void TrainConfig::validate(std::size_t samples) const {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw InvalidArgument("split fraction alpha must lie in (0, 1)");
  if (!(omega >= 0.0 && omega <= 1.0)) throw InvalidArgument("omega_h must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (max_epochs == 0) throw InvalidArgument("max epochs must be positive");
  const double train_samples = (1.0 - val_fraction) * static_cast<double>(samples);
  if (static_cast<double>(batch_size) > train_samples) {
    throw InvalidArgument("batch size " + std::to_string(batch_size) + " exceeds the " +
                          std::to_string(static_cast<std::size_t>(train_samples)) + " training samples");
  }
}

BasisProvenance BasisProvenance::of(const rpod::PodBasis& basis) {
  return BasisProvenance{basis.config.rank, basis.config.oversampling, basis.config.power_iterations,
                         basis.config.seed};
}

PodDlRomModel Checkpoint::model() const { return PodDlRomModel(architecture, encoder, dfnn, decoder); }

TrainingState prepare_training(const Dataset& dataset, const rpod::PodBasis& basis, const Architecture& architecture,
                               const TrainConfig& config) {
  TrainingState s = split_and_normalize(dataset, basis, architecture, config);
  s.model = PodDlRomModel(architecture, config.init_seed);
  reset_optimizers(s);
  return s;
}

TrainingState warm_start(const Checkpoint& checkpoint, const Dataset& dataset, const rpod::PodBasis& basis,
                         const Architecture& architecture, const TrainConfig& config) {
  const auto diffs = architecture_differences(checkpoint.architecture, architecture);
  if (!diffs.empty()) {
    std::string msg = "checkpoint architecture differs from the requested one:";
    for (const auto& d : diffs) msg += "\n  " + d;
    throw InvalidArgument(msg);
  }
  TrainingState s = split_and_normalize(dataset, basis, architecture, config);
  s.model = checkpoint.model();
  reset_optimizers(s);
  return s;
}

Checkpoint run_training(TrainingState state, const EpochCallback& on_epoch) {
  const TrainConfig& cfg = state.config;
  PodDlRomModel& model = state.model;
  TrainingHistory history;

  const auto train_n = static_cast<std::size_t>(state.train_params.cols());
  if (train_n == 0 || state.val_params.cols() == 0) throw InvalidArgument("training needs non-empty splits");

  history.initial_val_loss = evaluate_loss(model, state.val_params, state.val_coords, cfg.omega).total;
  if (!std::isfinite(history.initial_val_loss)) {
    throw TrainingDiverged("validation loss is not finite before training", history);
  }
  double best = history.initial_val_loss;
  std::vector<double> best_e = model.encoder_params();
  std::vector<double> best_df = model.dfnn_params();
  std::vector<double> best_d = model.decoder_params();

  std::vector<std::size_t> order(train_n);
  std::size_t wait = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix(state.shuffle_stream + epoch));
    rng.shuffle(order);

    double train_sum = 0.0;
    try {
      for (std::size_t first = 0; first < train_n; first += cfg.batch_size) {
        const std::size_t count = std::min(cfg.batch_size, train_n - first);
        const std::span<const std::size_t> idx(order.data() + first, count);
        const Eigen::MatrixXd bp = gather(state.train_params, idx);
        const Eigen::MatrixXd bc = gather(state.train_coords, idx);
        const LossGradient g = loss_and_gradient(model, bp, bc, cfg.omega);
        nn::adam_step(state.adam_encoder, model.encoder_params(), g.encoder);
        nn::adam_step(state.adam_dfnn, model.dfnn_params(), g.dfnn);
        nn::adam_step(state.adam_decoder, model.decoder_params(), g.decoder);
        train_sum += g.terms.total * static_cast<double>(count);
      }
    } catch (const NumericalError& e) {
      throw TrainingDiverged("training diverged in epoch " + std::to_string(epoch) + ": " + e.what(), history);
    }
    const double train_loss = train_sum / static_cast<double>(train_n);
    const double val_loss = evaluate_loss(model, state.val_params, state.val_coords, cfg.omega).total;
    history.train_loss.push_back(train_loss);
    history.val_loss.push_back(val_loss);
    if (!std::isfinite(val_loss)) {
      throw TrainingDiverged("validation loss is not finite in epoch " + std::to_string(epoch), history);
    }
    if (on_epoch) on_epoch(epoch, train_loss, val_loss);

    if (val_loss < best) {
      best = val_loss;
      history.best_epoch = epoch;
      best_e = model.encoder_params();
      best_df = model.dfnn_params();
      best_d = model.decoder_params();
      wait = 0;
    } else if (++wait >= cfg.patience) {
      break;
    }
    if (cfg.target_loss > 0.0 && best <= cfg.target_loss) break;
  }

  Checkpoint ck;
  ck.architecture = model.architecture();
  ck.encoder = std::move(best_e);
  ck.dfnn = std::move(best_df);
  ck.decoder = std::move(best_d);
  ck.stats = state.stats;
  ck.adam_encoder = std::move(state.adam_encoder);
  ck.adam_dfnn = std::move(state.adam_dfnn);
  ck.adam_decoder = std::move(state.adam_decoder);
  ck.epochs = history.val_loss.size();
  ck.best_val_loss = best;
  ck.history = std::move(history);
  ck.config = cfg;
  ck.provenance = state.provenance;
  return ck;
}

Checkpoint train(const Dataset& dataset, const rpod::PodBasis& basis, const Architecture& architecture,
                 const TrainConfig& config, const EpochCallback& on_epoch) {
  return run_training(prepare_training(dataset, basis, architecture, config), on_epoch);
}

Eigen::MatrixXd infer_coordinates(const PodDlRomModel& model, const NormalizationStats& stats,
                                  const Eigen::Ref<const Eigen::MatrixXd>& params) {
  if (stats.empty()) throw InvalidArgument("inference needs normalization statistics");
  const auto& arch = model.architecture();
  if (static_cast<std::size_t>(params.rows()) != arch.n_params + 1) {
    throw InvalidArgument("inference expects " + std::to_string(arch.n_params + 1) +
                          " parameter rows (time first), got " + std::to_string(params.rows()));
  }
  const Eigen::MatrixXd scaled = normalize_params(params, stats);
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(arch.pod_rank * arch.channels), params.cols());
  constexpr Eigen::Index kChunk = 1024;
  for (Eigen::Index first = 0; first < params.cols(); first += kChunk) {
    const Eigen::Index count = std::min(kChunk, params.cols() - first);
    coords.middleCols(first, count) = images_to_coords(model.decode(model.latent(scaled.middleCols(first, count))));
  }
  return denormalize_coords(coords, stats);
}

Eigen::MatrixXd infer(const PodDlRomModel& model, const NormalizationStats& stats, const rpod::PodBasis& basis,
                      const Eigen::Ref<const Eigen::MatrixXd>& params) {
  const auto& arch = model.architecture();
  if (basis.rank() != arch.pod_rank || basis.channel_count() != arch.channels) {
    throw InvalidArgument("basis shape does not match the model (N = " + std::to_string(arch.pod_rank) +
                          ", d = " + std::to_string(arch.channels) + ")");
  }
  return rpod::lift(basis, infer_coordinates(model, stats, params));
}

}  // namespace podlrom::dlrom
