#include <benchmark/benchmark.h>

#include <numeric>

#include "ppnn/baselines.hpp"
#include "ppnn/nn.hpp"
#include "ppnn/simulate.hpp"
#include "ppnn/sumstats.hpp"

using namespace ppnn;

namespace {

void BM_CenteredL(benchmark::State& state) {
  Rng rng(1);
  const Window w = Window::unit_square();
  const auto x = sample_poisson(w, static_cast<double>(state.range(0)), rng);
  const auto r = default_r_grid(w);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_L_centered(x, r));
  state.counters["points"] = static_cast<double>(x.size());
}
BENCHMARK(BM_CenteredL)->Arg(100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_JFunction(benchmark::State& state) {
  Rng rng(2);
  const Window w = Window::unit_square();
  const auto x = sample_poisson(w, 300.0, rng);
  const auto r = nearest_neighbour_r_grid(w, 300.0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_J(x, r));
}
BENCHMARK(BM_JFunction)->Unit(benchmark::kMillisecond);

void BM_StraussChain(benchmark::State& state) {
  Rng rng(3);
  const McmcOptions opts{.iterations = state.range(0)};
  for (auto _ : state) benchmark::DoNotOptimize(sample_strauss(Window::unit_square(), {500.0, 0.3, 0.03}, rng, opts));
}
BENCHMARK(BM_StraussChain)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_LgcpStraussChain(benchmark::State& state) {
  Rng rng(4);
  FieldCache cache;
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_lgcp_strauss(Window::unit_square(), {{5.0, 1.0, 0.05}, 0.5, 0.02},
                                                 kDefaultFieldResolution, rng, {}, &cache));
}
BENCHMARK(BM_LgcpStraussChain)->Unit(benchmark::kMillisecond);

void BM_Field(benchmark::State& state, FieldMethod method) {
  Rng rng(5);
  FieldCache cache;
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_grf(Window::unit_square(), res, {5.0, 1.0, 0.05}, rng, &cache, method));
}
BENCHMARK_CAPTURE(BM_Field, circulant, FieldMethod::Circulant)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Field, cholesky, FieldMethod::Cholesky)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LgcpTheoreticalK(benchmark::State& state) {
  const auto r = default_r_grid(Window::unit_square());
  for (auto _ : state) benchmark::DoNotOptimize(lgcp_theoretical_K(r, 1.5, 0.05));
}
BENCHMARK(BM_LgcpTheoreticalK)->Unit(benchmark::kMillisecond);

Examples random_examples(int n) {
  Examples e;
  e.curves = Eigen::MatrixXd::Random(513, n);
  e.counts = Eigen::VectorXd::Random(n);
  e.targets = Eigen::MatrixXd::Random(3, n);
  return e;
}

void BM_NetworkForward(benchmark::State& state) {
  Rng rng(6);
  Network net(NetworkArch::standard(3));
  net.initialize(rng);
  const Examples e = random_examples(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(net.forward(std::span<const double>(e.curves.data(), 513), e.counts(0)));
}
BENCHMARK(BM_NetworkForward)->Unit(benchmark::kMicrosecond);

void BM_NetworkBatchGradient(benchmark::State& state) {
  Rng rng(7);
  Network net(NetworkArch::standard(3));
  net.initialize(rng);
  const Examples e = random_examples(100);
  std::vector<Eigen::Index> cols(100);
  std::iota(cols.begin(), cols.end(), Eigen::Index{0});
  std::vector<double> grad(net.parameter_count());
  for (auto _ : state) benchmark::DoNotOptimize(net.loss_and_gradient(e, cols, grad));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_NetworkBatchGradient)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
