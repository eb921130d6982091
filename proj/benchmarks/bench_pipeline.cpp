#include <benchmark/benchmark.h>

#include "netsig/corpus.hpp"
#include "netsig/detectors.hpp"
#include "netsig/pipeline.hpp"
#include "netsig/severity.hpp"

using namespace netsig;

namespace {

const GeneratedCorpus& corpus_of(std::size_t nodes) {
  static std::map<std::size_t, GeneratedCorpus> cache;
  auto it = cache.find(nodes);
  if (it == cache.end()) {
    CorpusSpec spec;
    spec.node_count = nodes;
    it = cache.emplace(nodes, generate_corpus(spec)).first;
  }
  return it->second;
}

void BM_Generate(benchmark::State& state) {
  CorpusSpec spec;
  spec.node_count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_corpus(spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(spec.total_properties()));
}
BENCHMARK(BM_Generate)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);

void BM_Parse(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  std::size_t bytes = 0;
  for (const auto& [name, text] : c.device_texts) bytes += text.size();
  for (auto _ : state) {
    for (const auto& [name, text] : c.device_texts) benchmark::DoNotOptimize(parse_config(text, name));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_Parse)->Arg(150)->Unit(benchmark::kMillisecond);

void BM_BuildBundle(benchmark::State& state) {
  const auto& c = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_bundle(c.snapshot));
}
BENCHMARK(BM_BuildBundle)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);

void BM_Mine(benchmark::State& state) {
  const auto bundle = build_bundle(corpus_of(static_cast<std::size_t>(state.range(0))).snapshot);
  for (auto _ : state) benchmark::DoNotOptimize(mine_signatures(bundle.view(), {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(bundle.vectors.size()));
}
BENCHMARK(BM_Mine)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);

void BM_Detect(benchmark::State& state) {
  const auto bundle = build_bundle(corpus_of(150).snapshot);
  const auto set = mine_signatures(bundle.view(), {});
  DetectorConfig config;
  config.method = static_cast<Method>(state.range(0));
  state.SetLabel(std::string(to_string(config.method)));
  for (auto _ : state) benchmark::DoNotOptimize(run_detector(config, bundle, &set));
}
BENCHMARK(BM_Detect)
    ->Arg(static_cast<int>(Method::Signature))
    ->Arg(static_cast<int>(Method::ZScore))
    ->Arg(static_cast<int>(Method::ModifiedZScore))
    ->Arg(static_cast<int>(Method::Gmm))
    ->Unit(benchmark::kMillisecond);

void BM_Severity(benchmark::State& state) {
  const auto bundle = build_bundle(corpus_of(150).snapshot);
  const auto findings = detect_signature_outliers(bundle, mine_signatures(bundle.view(), {}));
  for (auto _ : state) {
    auto copy = findings;
    apply_severity(copy, bundle.graph, {});
    benchmark::DoNotOptimize(rank(copy, RankMode::Severity, {}));
  }
}
BENCHMARK(BM_Severity)->Unit(benchmark::kMicrosecond);

}  // namespace
