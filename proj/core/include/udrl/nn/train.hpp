#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "udrl/nn/loss.hpp"
#include "udrl/nn/mlp.hpp"
#include "udrl/nn/optimizer.hpp"
#include "udrl/nn/recurrent.hpp"

namespace udrl::nn {

struct Example {
  std::vector<double> input;
  std::vector<double> target;
};

// One sequence for masked BPTT. targets[t] is ignored where mask[t] == 0.
// `initial` (optional) is the hidden state the sequence starts from.
struct SequenceExample {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;
  std::vector<double> mask;
  RecurrentNet::State initial;
};

// Mean loss over the batch; accumulates the mean gradient into `grad`
// (which is not cleared).
double batch_gradient(const Mlp& net, const OutputHead& head, std::span<const Example> batch, LossKind loss,
                      std::span<double> grad);

// Mask-weighted mean loss over all steps of all sequences. Backpropagation
// starts at most `window` steps before a sequence's first masked step;
// earlier steps only condition the hidden state. Returns 0 and leaves
// `grad` untouched if every mask entry is zero.
double sequence_gradient(const RecurrentNet& net, const OutputHead& head, std::span<const SequenceExample> batch,
                         LossKind loss, std::span<double> grad, std::size_t window = 32);

// One optimizer update. Returns the pre-update batch loss; throws
// DivergenceError on a non-finite loss without touching the parameters.
double train_step(Mlp& net, const OutputHead& head, std::span<const Example> batch, LossKind loss,
                  Optimizer& optimizer);

double bptt_step(RecurrentNet& net, const OutputHead& head, std::span<const SequenceExample> batch, LossKind loss,
                 Optimizer& optimizer, std::size_t window = 32);

}  // namespace udrl::nn
