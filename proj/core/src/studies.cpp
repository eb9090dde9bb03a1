#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "podlrom/log.hpp"
#include "podlrom/metrics.hpp"
#include "podlrom/random.hpp"
#include "podlrom/studies.hpp"

namespace podlrom::eval {
namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", x);
  return buf;
}

double score(const dlrom::Checkpoint& ck, const rpod::PodBasis& basis, const Dataset& test_set) {
  const Eigen::MatrixXd approx = dlrom::infer(ck.model(), ck.stats, basis, test_set.parameters.data);
  return error_indicator(test_set.snapshots.data, approx, test_set.snapshots.n_train, test_set.snapshots.n_t);
}

template <class F>
double median_seconds(std::size_t reps, F&& f) {
  std::vector<double> times;
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return median_of(std::move(times));
}

}  // namespace

StudyNResult study_vs_n(const Dataset& train_set, const Dataset& test_set, std::span<const std::size_t> ranks,
                        const ModelRecipe& recipe, const dlrom::EpochCallback& on_epoch) {
  if (ranks.empty()) throw InvalidArgument("study_vs_n needs at least one rank");
  test_set.validate();
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());

  StudyNResult out;
  const auto& ts = test_set.snapshots;
  for (std::size_t n : sorted) {
    rpod::RsvdConfig cfg = recipe.rsvd;
    cfg.rank = n;
    const rpod::PodBasis basis = rpod::compute_basis(train_set.snapshots, cfg);
    const auto arch = dlrom::default_architecture(n, basis.channel_count(), recipe.latent,
                                                  train_set.parameters.n_params(), recipe.architecture);
    const dlrom::Checkpoint ck = dlrom::train(train_set, basis, arch, recipe.train, on_epoch);

    StudyNRow row;
    row.rank = n;
    row.epochs = ck.epochs;
    const Eigen::MatrixXd truth_coords = rpod::project(basis, ts.data);
    const Eigen::MatrixXd coords = dlrom::infer_coordinates(ck.model(), ck.stats, test_set.parameters.data);
    row.eps_total = error_indicator(ts.data, rpod::lift(basis, coords), ts.n_train, ts.n_t);
    row.eps_projection = error_indicator(ts.data, rpod::lift(basis, truth_coords), ts.n_train, ts.n_t);
    row.eps_coords = error_indicator(truth_coords, coords, ts.n_train, ts.n_t);
    if (!out.rows.empty() && row.eps_projection > out.rows.back().eps_projection * (1.0 + 1e-8) + 1e-14) {
      out.projection_monotone = false;
      warn("projection error increases from N = " + std::to_string(out.rows.back().rank) + " to N = " +
           std::to_string(n));
    }
    out.rows.push_back(row);
  }
  return out;
}

std::string study_n_csv(const StudyNResult& result) {
  std::ostringstream os;
  os << "N,eps_total,eps_projection,eps_coords,epochs\n";
  for (const auto& r : result.rows) {
    os << r.rank << ',' << fmt(r.eps_total) << ',' << fmt(r.eps_projection) << ',' << fmt(r.eps_coords) << ','
       << r.epochs << '\n';
  }
  return os.str();
}

ParameterSampler box_sampler(std::vector<fom::Axis> box) {
  if (box.empty()) throw InvalidArgument("parameter box has no axes");
  return [box = std::move(box)](std::size_t count, std::uint64_t seed) {
    if (count == 0) throw InvalidArgument("cannot sample zero parameters");
    if (box.size() == 1) {
      fom::Axis a = box.front();
      a.count = count;
      return fom::cartesian_grid(std::span(&a, 1));
    }
    Rng rng(seed);
    std::vector<fom::ParameterTuple> out(count);
    for (auto& mu : out) {
      for (const auto& a : box) mu.push_back(rng.uniform(a.min, a.max));
    }
    return out;
  };
}

std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("loglog_slope: size mismatch");
  if (x.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) return std::nullopt;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

StudyNtrainResult study_vs_ntrain(const fom::FullOrderModel& model, const ParameterSampler& sampler,
                                  std::span<const double> times, std::span<const std::size_t> n_train,
                                  std::span<const std::uint64_t> seeds, const Dataset& test_set,
                                  const ModelRecipe& recipe) {
  if (n_train.empty() || seeds.empty()) throw InvalidArgument("study_vs_ntrain needs sizes and seeds");
  test_set.validate();
  StudyNtrainResult out;
  for (std::size_t count : n_train) {
    StudyNtrainRow row;
    row.n_train = count;
    for (std::uint64_t seed : seeds) {
      const Dataset data = fom::build_dataset(model, sampler(count, seed), times);
      rpod::RsvdConfig cfg = recipe.rsvd;
      cfg.seed = seed;
      const rpod::PodBasis basis = rpod::compute_basis(data.snapshots, cfg);
      const auto arch = dlrom::default_architecture(cfg.rank, basis.channel_count(), recipe.latent,
                                                    data.parameters.n_params(), recipe.architecture);
      dlrom::TrainConfig tc = recipe.train;
      tc.shuffle_seed = seed;
      tc.init_seed = seed;
      row.eps_rel.push_back(score(dlrom::train(data, basis, arch, tc), basis, test_set));
    }
    row.median = median_of(row.eps_rel);
    out.rows.push_back(std::move(row));
  }
  std::vector<double> x, y;
  for (const auto& r : out.rows) {
    x.push_back(static_cast<double>(r.n_train));
    y.push_back(r.median);
  }
  out.slope = loglog_slope(x, y);
  return out;
}

std::string study_ntrain_csv(const StudyNtrainResult& result) {
  std::ostringstream os;
  os << "# slope=" << (result.slope ? fmt(*result.slope) : std::string("absent"))
     << " reference_slope=" << fmt(StudyNtrainResult::reference_slope) << '\n';
  os << "N_train,median_eps_rel,eps_rel_seeds\n";
  for (const auto& r : result.rows) {
    os << r.n_train << ',' << fmt(r.median) << ',';
    for (std::size_t i = 0; i < r.eps_rel.size(); ++i) os << (i ? ";" : "") << fmt(r.eps_rel[i]);
    os << '\n';
  }
  return os.str();
}

BenchReport bench(const dlrom::Checkpoint& checkpoint, const rpod::PodBasis& basis, const fom::FullOrderModel& model,
                  std::span<const double> mu, std::span<const double> times, std::size_t repetitions,
                  std::optional<double> train_seconds) {
  if (times.empty()) throw InvalidArgument("bench needs at least one query instant");
  if (repetitions == 0) throw InvalidArgument("bench needs at least one repetition");
  if (mu.size() != model.parameter_count()) throw InvalidArgument("bench parameter tuple has the wrong length");
  Eigen::MatrixXd params(static_cast<Eigen::Index>(mu.size() + 1), static_cast<Eigen::Index>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    params(0, c) = times[k];
    for (std::size_t i = 0; i < mu.size(); ++i) params(static_cast<Eigen::Index>(i + 1), c) = mu[i];
  }
  const dlrom::PodDlRomModel net = checkpoint.model();
  BenchReport r;
  r.queries = times.size();
  r.repetitions = repetitions;
  r.epochs = checkpoint.epochs;
  r.train_seconds = train_seconds;
  volatile double sink = 0.0;
  r.infer_seconds = median_seconds(repetitions, [&] { sink = sink + dlrom::infer(net, checkpoint.stats, basis, params)(0, 0); });
  r.fom_seconds = median_seconds(repetitions, [&] { sink = sink + model.solve(mu, times)(0, 0); });
  r.speedup = r.infer_seconds > 0.0 ? r.fom_seconds / r.infer_seconds : 0.0;
  return r;
}

std::string bench_report_text(const BenchReport& r) {
  std::ostringstream os;
  os << "# timings are hardware-dependent and not reproducible\n";
  os << "queries " << r.queries << "\n";
  os << "repetitions " << r.repetitions << "\n";
  os << "infer_seconds_median " << fmt(r.infer_seconds) << "\n";
  os << "fom_seconds_median " << fmt(r.fom_seconds) << "\n";
  os << "speedup " << fmt(r.speedup) << "\n";
  os << "train_epochs " << r.epochs << "\n";
  os << "train_seconds " << (r.train_seconds ? fmt(*r.train_seconds) : std::string("unavailable")) << "\n";
  os << "# reference full-scale GPU speed-ups of 1e4 to 1e5 (e.g. 1.62e4) are context only\n";
  return os.str();
}

}  // namespace podlrom::eval
