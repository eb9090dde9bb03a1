#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "podlrom/dlrom.hpp"
#include "podlrom/fom.hpp"
#include "podlrom/nn.hpp"
#include "podlrom/random.hpp"
#include "podlrom/rpod.hpp"

using namespace podlrom;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (double& x : m.reshaped()) x = rng.normal();
  return m;
}

void BM_Rsvd(benchmark::State& state) {
  const auto rank = static_cast<std::size_t>(state.range(0));
  const Eigen::MatrixXd s = gaussian(4096, 400, 1);
  for (auto _ : state) {
    auto r = rpod::rsvd(s, rpod::RsvdConfig{rank, 8, 2, 0});
    benchmark::DoNotOptimize(r.basis.data());
  }
}
BENCHMARK(BM_Rsvd)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_JacobiSvd(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd a = gaussian(n, n, 2);
  for (auto _ : state) {
    auto r = rpod::jacobi_svd(a);
    benchmark::DoNotOptimize(r.singular_values.data());
  }
}
BENCHMARK(BM_JacobiSvd)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

// Encoder of the default 8x8 architecture, one minibatch.
void BM_EncoderForwardBackward(benchmark::State& state) {
  const auto arch = dlrom::default_architecture(64, 1, 3, 2);
  const nn::Network net = arch.encoder_network();
  const auto params = nn::init_params(net, 0).values;
  const std::size_t batch = 40;
  nn::Tensor4 x(batch, net.input_shape());
  Rng rng(3);
  for (double& v : x.data()) v = rng.uniform01();
  nn::Tensor4 up(batch, net.output_shape());
  for (double& v : up.data()) v = rng.normal();
  for (auto _ : state) {
    nn::ForwardCache cache;
    nn::forward(net, params, x, &cache);
    auto g = nn::backward(net, params, cache, up);
    benchmark::DoNotOptimize(g.params.data());
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_TrainingStep(benchmark::State& state) {
  const auto arch = dlrom::default_architecture(64, 1, 3, 2);
  const dlrom::PodDlRomModel model(arch, 0);
  Rng rng(4);
  Eigen::MatrixXd params(3, 40), coords(64, 40);
  for (double& v : params.reshaped()) v = rng.uniform01();
  for (double& v : coords.reshaped()) v = rng.uniform01();
  for (auto _ : state) {
    auto g = dlrom::loss_and_gradient(model, params, coords, 0.5);
    benchmark::DoNotOptimize(g.terms.total);
  }
}
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMicrosecond);

void BM_Infer(benchmark::State& state) {
  const auto queries = state.range(0);
  const auto arch = dlrom::default_architecture(64, 1, 3, 2);
  const dlrom::PodDlRomModel model(arch, 0);
  const Eigen::MatrixXd coords = gaussian(64, 50, 5);
  Eigen::MatrixXd train_params(3, 50);
  Rng rng(6);
  for (double& v : train_params.reshaped()) v = rng.uniform01();
  const auto stats = dlrom::compute_stats(train_params, coords, 1);
  const Eigen::MatrixXd q = train_params.leftCols(queries);
  for (auto _ : state) {
    auto u = dlrom::infer_coordinates(model, stats, q);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_Infer)->Arg(1)->Arg(50)->Unit(benchmark::kMicrosecond);

void BM_AdrSolve(benchmark::State& state) {
  fom::AdrProblem p;
  p.grid_points = static_cast<std::size_t>(state.range(0));
  const std::vector<double> mu{0.003, 50.0, 0.5, 0.5};
  const auto times = fom::uniform_sample_times(20, 1, p.dt);
  for (auto _ : state) {
    auto u = fom::solve_adr(p, mu, times);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_AdrSolve)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_MonodomainSolve(benchmark::State& state) {
  fom::MonodomainProblem p;
  p.grid_points = 32;
  p.final_time = 10.0;
  const std::vector<double> mu{12.9 * 0.1, 12.9 * 0.05};
  const auto times = fom::uniform_sample_times(10, 10, p.dt);
  for (auto _ : state) {
    auto u = fom::solve_monodomain(p, mu, times);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_MonodomainSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
