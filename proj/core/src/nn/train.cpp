#include "udrl/nn/train.hpp"

#include <cmath>
#include <stdexcept>

#include "udrl/errors.hpp"

namespace udrl::nn {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

double batch_gradient(const Mlp& net, const OutputHead& head, std::span<const Example> batch, LossKind loss,
                      std::span<double> grad) {
  if (batch.empty()) throw std::invalid_argument("train: empty batch");
  if (net.output_dim() != head.raw_dim()) throw std::invalid_argument("train: head does not match network output");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  Mlp::Tape tape;
  for (const auto& ex : batch) {
    const auto raw = net.forward(ex.input, tape);
    auto l = head.loss(raw, ex.target, loss);
    total += l.value;
    for (auto& g : l.grad) g *= inv_n;
    net.backward(tape, l.grad, grad);
  }
  return total * inv_n;
}

double sequence_gradient(const RecurrentNet& net, const OutputHead& head, std::span<const SequenceExample> batch,
                         LossKind loss, std::span<double> grad, std::size_t window) {
  if (batch.empty()) throw std::invalid_argument("train: empty batch");
  if (net.output_dim() != head.raw_dim()) throw std::invalid_argument("train: head does not match network output");
  if (window == 0) throw std::invalid_argument("train: bptt window must be positive");
  double weight_sum = 0.0;
  for (const auto& seq : batch) {
    if (seq.mask.size() != seq.inputs.size() || seq.targets.size() != seq.inputs.size()) {
      throw std::invalid_argument("train: inputs, targets and mask must have equal length");
    }
    for (double w : seq.mask) weight_sum += w;
  }
  if (weight_sum == 0.0) return 0.0;

  double total = 0.0;
  RecurrentNet::Tape tape;
  for (const auto& seq : batch) {
    std::size_t first = seq.mask.size();
    for (std::size_t t = 0; t < seq.mask.size(); ++t) {
      if (seq.mask[t] != 0.0) {
        first = t;
        break;
      }
    }
    if (first == seq.mask.size()) continue;
    const std::size_t start = first + 1 > window ? first + 1 - window : 0;

    RecurrentNet::State state = seq.initial.h.empty() ? net.initial_state() : seq.initial;
    std::span<const std::vector<double>> inputs(seq.inputs);
    net.unroll(inputs.subspan(0, start), state);
    const auto ys = net.unroll(inputs.subspan(start), state, &tape);

    std::vector<std::vector<double>> dys(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double w = seq.mask[start + i];
      if (w == 0.0) continue;
      auto l = head.loss(ys[i], seq.targets[start + i], loss);
      total += w * l.value;
      for (auto& g : l.grad) g *= w / weight_sum;
      dys[i] = std::move(l.grad);
    }
    net.backward(tape, dys, grad);
  }
  return total / weight_sum;
}

double train_step(Mlp& net, const OutputHead& head, std::span<const Example> batch, LossKind loss,
                  Optimizer& optimizer) {
  std::vector<double> grad(net.num_params(), 0.0);
  const double value = batch_gradient(net, head, batch, loss, grad);
  if (!std::isfinite(value) || !all_finite(grad)) throw DivergenceError("non-finite loss in train_step");
  optimizer.step(net.params(), grad);
  return value;
}

double bptt_step(RecurrentNet& net, const OutputHead& head, std::span<const SequenceExample> batch, LossKind loss,
                 Optimizer& optimizer, std::size_t window) {
  bool any = false;
  for (const auto& seq : batch) {
    for (double w : seq.mask) any = any || w != 0.0;
  }
  std::vector<double> grad(net.num_params(), 0.0);
  const double value = sequence_gradient(net, head, batch, loss, grad, window);
  if (!std::isfinite(value) || !all_finite(grad)) throw DivergenceError("non-finite loss in bptt_step");
  if (any) optimizer.step(net.params(), grad);
  return value;
}

}  // namespace udrl::nn
