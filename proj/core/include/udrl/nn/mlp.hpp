#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "udrl/nn/activation.hpp"
#include "udrl/nn/tensor.hpp"
#include "udrl/rng.hpp"

namespace udrl::nn {

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::identity;
  std::size_t offset = 0;  // weights (out x in, row-major) then bias (out)

  std::size_t num_params() const { return out * in + out; }
  bool operator==(const DenseLayer&) const = default;
};

// Feedforward network. All parameters live in one flat vector so that
// optimizers, gradient checks and checkpoints can treat them uniformly.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim,
      Activation hidden_act, Activation output_act = Activation::identity);

  // Uniform in +-1/sqrt(fan_in), biases included.
  void initialize(CounterRng& rng);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return layers_.empty() ? input_dim_ : layers_.back().out; }
  std::size_t num_params() const { return params_.size(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  struct Tape {
    std::vector<std::vector<double>> values;  // values[0] = input, values[l + 1] = output of layer l
  };

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, Tape& tape) const;

  // Accumulates dL/dparams into `grad` (same layout as params()) and
  // returns dL/dinput.
  std::vector<double> backward(const Tape& tape, std::span<const double> grad_out, std::span<double> grad) const;

  std::vector<Tensor> tensors() const;
  void load_tensors(const std::vector<Tensor>& tensors);

  bool operator==(const Mlp&) const = default;

 private:
  std::size_t input_dim_ = 0;
  std::vector<DenseLayer> layers_;
  std::vector<double> params_;
};

}  // namespace udrl::nn
