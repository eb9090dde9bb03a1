#pragma once

// Parameter studies and timing reports built on the full pipeline.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "podlrom/dlrom.hpp"
#include "podlrom/fom.hpp"
#include "podlrom/rpod.hpp"

namespace podlrom::eval {

struct ModelRecipe {
  rpod::RsvdConfig rsvd;  // rank is overridden by the studies
  dlrom::ArchitectureOptions architecture;
  std::size_t latent = 2;
  dlrom::TrainConfig train;
};

struct StudyNRow {
  std::size_t rank = 0;
  double eps_total = 0.0;       // eps_rel(u_h, u~_h)
  double eps_projection = 0.0;  // eps_rel(u_h, V V^T u_h)
  double eps_coords = 0.0;      // eps_rel(V^T u_h, u~_N)
  std::size_t epochs = 0;
};

struct StudyNResult {
  std::vector<StudyNRow> rows;  // ascending rank
  bool projection_monotone = true;
};

// One basis and one model per rank, trained on `train_set`, scored on `test_set`.
StudyNResult study_vs_n(const Dataset& train_set, const Dataset& test_set, std::span<const std::size_t> ranks,
                        const ModelRecipe& recipe, const dlrom::EpochCallback& on_epoch = {});

// Header: N,eps_total,eps_projection,eps_coords,epochs
std::string study_n_csv(const StudyNResult& result);

using ParameterSampler = std::function<std::vector<fom::ParameterTuple>(std::size_t count, std::uint64_t seed)>;

// Uniform random tuples inside the box; a single axis gives an evenly spaced grid.
ParameterSampler box_sampler(std::vector<fom::Axis> box);

struct StudyNtrainRow {
  std::size_t n_train = 0;
  std::vector<double> eps_rel;  // one per seed
  double median = 0.0;
};

struct StudyNtrainResult {
  std::vector<StudyNtrainRow> rows;
  std::optional<double> slope;  // log-log least squares; absent below two points
  static constexpr double reference_slope = -1.0;
};

// Trains at every N_train with every seed (shuffle, init and rSVD seeds all
// set to it) under the recipe's fixed epoch budget.
StudyNtrainResult study_vs_ntrain(const fom::FullOrderModel& model, const ParameterSampler& sampler,
                                  std::span<const double> times, std::span<const std::size_t> n_train,
                                  std::span<const std::uint64_t> seeds, const Dataset& test_set,
                                  const ModelRecipe& recipe);

// Header: N_train,median_eps_rel,eps_rel_seeds (';' separated); the first
// line is a comment carrying the fitted and reference slopes.
std::string study_ntrain_csv(const StudyNtrainResult& result);

std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y);

struct BenchReport {
  std::size_t queries = 0;
  std::size_t repetitions = 0;
  double infer_seconds = 0.0;  // median over repetitions, all queries
  double fom_seconds = 0.0;    // median FOM solve over the same instants
  double speedup = 0.0;
  std::size_t epochs = 0;
  std::optional<double> train_seconds;
};

// Wall-clock medians; results depend on the host and are not reproducible.
BenchReport bench(const dlrom::Checkpoint& checkpoint, const rpod::PodBasis& basis, const fom::FullOrderModel& model,
                  std::span<const double> mu, std::span<const double> times, std::size_t repetitions = 5,
                  std::optional<double> train_seconds = std::nullopt);

std::string bench_report_text(const BenchReport& report);

}  // namespace podlrom::eval
