#include <benchmark/benchmark.h>

#include "udrl/nn/mlp.hpp"
#include "udrl/nn/recurrent.hpp"
#include "udrl/nn/train.hpp"

using namespace udrl;
using namespace udrl::nn;

namespace {

std::vector<double> random_vec(CounterRng& r, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform(-1.0, 1.0);
  return v;
}

// Input width of a grid_world controller: 4 + 25 + 1 + (1 + 1 + 2 + 25).
constexpr std::size_t kGridInputs = 59;

void BM_MlpForward(benchmark::State& state) {
  CounterRng r(0);
  const std::size_t width = state.range(0);
  Mlp net(kGridInputs, {width, width}, 4, Activation::tanh);
  net.initialize(r);
  const auto x = random_vec(r, kGridInputs);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_MlpForward)->Arg(32)->Arg(64)->Arg(128);

void BM_MlpBatchGradient(benchmark::State& state) {
  CounterRng r(0);
  Mlp net(kGridInputs, {64, 64}, 4, Activation::tanh);
  net.initialize(r);
  const OutputHead head(HeadKind::softmax, 4);
  std::vector<Example> batch;
  for (int i = 0; i < state.range(0); ++i) {
    std::vector<double> t(4, 0.0);
    t[r.uniform_index(4)] = 1.0;
    batch.push_back({random_vec(r, kGridInputs), t});
  }
  std::vector<double> grad(net.params().size());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    benchmark::DoNotOptimize(batch_gradient(net, head, batch, LossKind::crossentropy, grad));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpBatchGradient)->Arg(64);

void BM_RecurrentSequenceGradient(benchmark::State& state) {
  CounterRng r(0);
  const auto cell = static_cast<CellKind>(state.range(1));
  const OutputHead head(HeadKind::softmax, 2);
  RecurrentNet net(16, 32, head.raw_dim(), cell);
  net.initialize(r);
  SequenceExample ex;
  for (int t = 0; t < state.range(0); ++t) {
    ex.inputs.push_back(random_vec(r, 16));
    ex.targets.push_back({1.0, 0.0});
    ex.mask.push_back(1.0);
  }
  ex.initial = net.initial_state();
  std::vector<double> grad(net.params().size());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    benchmark::DoNotOptimize(sequence_gradient(net, head, std::span(&ex, 1), LossKind::crossentropy, grad));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RecurrentSequenceGradient)
    ->Args({32, static_cast<int>(CellKind::elman)})
    ->Args({32, static_cast<int>(CellKind::lstm)});

}  // namespace
