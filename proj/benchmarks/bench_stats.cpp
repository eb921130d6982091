#include <benchmark/benchmark.h>

#include "netsig/stats.hpp"
#include "netsig/util.hpp"

using namespace netsig;

namespace {

std::vector<double> series(std::size_t n) {
  Rng rng(5);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

void BM_ModifiedZScore(benchmark::State& state) {
  const auto v = series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stats::score_modified_zscore(v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ModifiedZScore)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity();

void BM_GmmFit(benchmark::State& state) {
  Rng rng(9);
  stats::Matrix rows(static_cast<std::size_t>(state.range(0)), std::vector<double>(8));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto& x : rows[i]) x = rng.normal() + static_cast<double>(i % 3) * 4;
  }
  stats::GmmConfig config;
  config.components = 3;
  for (auto _ : state) benchmark::DoNotOptimize(stats::fit_gmm(rows, config));
}
BENCHMARK(BM_GmmFit)->Arg(1000)->Arg(6000)->Unit(benchmark::kMillisecond);

}  // namespace
