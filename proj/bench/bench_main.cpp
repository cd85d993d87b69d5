#include <benchmark/benchmark.h>

#include <random>

#include "feamoe/explain.hpp"
#include "feamoe/metrics.hpp"

using namespace feamoe;

namespace {

MixtureModel makeModel(std::size_t dim, std::size_t experts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ExpertParams> ex(experts);
  GateParams gate;
  for (auto& e : ex) {
    for (std::size_t j = 0; j < dim; ++j) e.weights.push_back(n(rng));
    e.bias = n(rng);
    gate.weights.emplace_back();
    for (std::size_t j = 0; j < dim; ++j) gate.weights.back().push_back(0.5 * n(rng));
    gate.biases.push_back(0.5 * n(rng));
  }
  return MixtureModel(ex, gate);
}

std::vector<FeatureVector> makeInputs(std::size_t count, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<FeatureVector> xs(count, FeatureVector(dim));
  for (auto& x : xs) {
    for (auto& v : x) v = n(rng);
  }
  return xs;
}

std::vector<StreamInstance> makeInstances(std::size_t count, std::size_t dim) {
  std::vector<StreamInstance> out;
  std::mt19937_64 rng(3);
  for (auto& x : makeInputs(count, dim, 2)) out.push_back({x, static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)});
  return out;
}

template <bool Parallel>
void BM_ExactOracle(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const MixtureModel m = makeModel(dim, 4, 1);
  const Background bg{FeatureVector(dim, 0.0)};
  const FeatureVector x = makeInputs(1, dim, 5).front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? exactShapOracle(m, x, bg, ShapGame::FullModel)
                                      : serial::exactShapOracle(m, x, bg, ShapGame::FullModel));
  }
}

template <bool Parallel>
void BM_ExplainBatch(benchmark::State& state) {
  const MixtureModel m = makeModel(12, 8, 1);
  const Background bg{FeatureVector(12, 0.0)};
  const auto xs = makeInputs(static_cast<std::size_t>(state.range(0)), 12, 6);
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? explainBatch(m, xs, bg) : serial::explainBatch(m, xs, bg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_EvaluateDataset(benchmark::State& state) {
  const MixtureModel m = makeModel(12, 8, 1);
  const auto data = makeInstances(static_cast<std::size_t>(state.range(0)), 12);
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? evaluateDataset(m, data) : serial::evaluateDataset(m, data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KernelShap(benchmark::State& state) {
  const MixtureModel m = makeModel(12, 8, 1);
  const Background bg{FeatureVector(12, 0.0)};
  const FeatureVector x = makeInputs(1, 12, 7).front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernelShapEstimate(m, x, bg, static_cast<std::size_t>(state.range(0)), 1));
  }
}

}  // namespace

BENCHMARK(BM_ExactOracle<false>)->Name("exactOracle/serial")->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactOracle<true>)->Name("exactOracle/parallel")->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExplainBatch<false>)->Name("explainBatch/serial")->Arg(100)->Arg(10000);
BENCHMARK(BM_ExplainBatch<true>)->Name("explainBatch/parallel")->Arg(100)->Arg(10000);
BENCHMARK(BM_EvaluateDataset<false>)->Name("evaluateDataset/serial")->Arg(10000);
BENCHMARK(BM_EvaluateDataset<true>)->Name("evaluateDataset/parallel")->Arg(10000);
BENCHMARK(BM_KernelShap)->Name("kernelShap")->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
