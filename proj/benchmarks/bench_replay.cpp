#include <benchmark/benchmark.h>

#include "udrl/replay.hpp"

using namespace udrl;

namespace {

Episode episode(std::size_t T, std::uint64_t seed) {
  EpisodeRecorder rec("bench", seed, Dims{25, 1, 4}, Vec(25, 0.0));
  for (std::size_t t = 0; t < T; ++t) rec.record(one_hot(t % 4, 4), {-0.1}, one_hot(t % 25, 25));
  return std::move(rec).finish();
}

void BM_EnumeratePairs(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_pairs(state.range(0)));
  state.SetItemsProcessed(state.iterations() * pair_count(state.range(0)));
}
BENCHMARK(BM_EnumeratePairs)->Arg(50)->Arg(1000);

void BM_SampleBatch(benchmark::State& state) {
  ReplayBuffer buf(1000);
  for (std::uint64_t i = 0; i < 500; ++i) buf.add_episode(episode(50, i));
  CounterRng rng(0);
  RelabelMix mix{0.6, 0.3, 0.1, {0.5, 0.75, 0.875}};
  for (auto _ : state) benchmark::DoNotOptimize(sample_batch(buf, state.range(0), mix, HorizonScheme{}, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleBatch)->Arg(64)->Arg(256);

}  // namespace
