#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "podlrom/dlrom.hpp"
#include "podlrom/fom.hpp"
#include "podlrom/rpod.hpp"

namespace podlrom::cli {

struct Sampling {
  std::vector<fom::Axis> axes;                 // cartesian lattice, or
  std::vector<fom::ParameterTuple> points;     // explicit tuples
  std::size_t time_count = 0;
  std::size_t time_every = 1;                  // sample every k-th step

  bool empty() const { return axes.empty() && points.empty(); }
  std::vector<fom::ParameterTuple> parameters() const;
};

struct StudySettings {
  std::vector<std::size_t> ranks{16, 64};
  std::vector<std::size_t> n_train{5, 10, 20, 40};
  std::vector<std::uint64_t> seeds{0, 1, 2};
};

struct RunConfig {
  fom::AdrProblem adr;
  fom::MonodomainProblem monodomain;
  fom::Pulse1dProblem pulse1d;
  Sampling sampling;
  Sampling test_sampling;
  rpod::RsvdConfig rsvd;
  dlrom::ArchitectureOptions architecture;
  std::size_t latent = 0;  // 0 = n_mu + 1
  dlrom::TrainConfig training;
  StudySettings study;
};

// Parses and validates a JSON document. Every object rejects keys it does
// not know; errors are InvalidArgument with a dotted key path.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

std::unique_ptr<fom::FullOrderModel> make_model(const std::string& problem, const RunConfig& config);

// Sample instants t_k = (k + 1) * every * dt of the chosen problem.
std::vector<double> sample_times(const std::string& problem, const RunConfig& config, const Sampling& sampling);

}  // namespace podlrom::cli
