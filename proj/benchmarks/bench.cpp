#include <random>

#include <benchmark/benchmark.h>

#include "cuspmdn/cusp.hpp"
#include "cuspmdn/mdn.hpp"
#include "cuspmdn/presets.hpp"
#include "cuspmdn/sampler.hpp"

using namespace cuspmdn;

static void BM_SolveEquilibrium(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10, 10);
  std::vector<ControlParams> ps;
  for (int i = 0; i < 1024; ++i) ps.emplace_back(u(rng), u(rng));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_equilibrium(ps[i++ & 1023]));
  }
}
BENCHMARK(BM_SolveEquilibrium);

static void BM_SamplerBuild(benchmark::State& state) {
  for (auto _ : state) {
    StationaryCuspSampler s({1.0, 3.0});
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_SamplerBuild);

static void BM_SamplerDraw(benchmark::State& state) {
  const StationaryCuspSampler s({1.0, 3.0});
  Engine rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(s(rng));
}
BENCHMARK(BM_SamplerDraw);

static void BM_Generate(benchmark::State& state) {
  GenConfig g = presets::table1_config(0);
  g.model = static_cast<GenModel>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate(g));
  state.SetLabel(std::string(to_string(g.model)));
}
BENCHMARK(BM_Generate)->DenseRange(0, 2);

static void BM_LossAndGradients(benchmark::State& state) {
  NetworkConfig nc = presets::default_network(static_cast<std::size_t>(state.range(1)));
  nc.input_dim = 2;
  const MdnModel m = MdnModel::initialize(nc, 3);
  const auto n = state.range(0);
  FeatureMatrix x = FeatureMatrix::Random(n, 2);
  std::vector<double> y(static_cast<std::size_t>(n), 0.5);
  ParameterSet grad = m.params.zeros_like();
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradients(m, x, y, nullptr, &grad));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LossAndGradients)->Args({32, 1})->Args({32, 2})->Args({250, 2});

static void BM_PredictBatch(benchmark::State& state) {
  NetworkConfig nc = presets::default_network(2);
  nc.input_dim = 2;
  const MdnModel m = MdnModel::initialize(nc, 4);
  const FeatureMatrix x = FeatureMatrix::Random(250, 2);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(m, x));
  state.SetItemsProcessed(state.iterations() * 250);
}
BENCHMARK(BM_PredictBatch);

static void BM_TrainEpoch(benchmark::State& state) {
  GenConfig g = presets::table1_config(0);
  g.n = 250;
  const Dataset d = generate(g);
  TrainConfig tc = presets::default_training();
  tc.epochs = 1;
  const NetworkConfig nc = presets::default_network(2);
  for (auto _ : state) benchmark::DoNotOptimize(train(d, nc, tc));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
