#include "udrl/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace udrl::nn {

Mlp::Mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim,
         Activation hidden_act, Activation output_act)
    : input_dim_(input_dim) {
  if (input_dim == 0 || output_dim == 0) throw std::invalid_argument("mlp: dimensions must be positive");
  std::size_t in = input_dim;
  std::size_t offset = 0;
  for (auto h : hidden) {
    if (h == 0) throw std::invalid_argument("mlp: hidden width must be positive");
    layers_.push_back(DenseLayer{in, h, hidden_act, offset});
    offset += layers_.back().num_params();
    in = h;
  }
  layers_.push_back(DenseLayer{in, output_dim, output_act, offset});
  offset += layers_.back().num_params();
  params_.assign(offset, 0.0);
}

void Mlp::initialize(CounterRng& rng) {
  for (const auto& l : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (std::size_t i = 0; i < l.num_params(); ++i) params_[l.offset + i] = rng.uniform(-bound, bound);
  }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  Tape tape;
  return forward(x, tape);
}

std::vector<double> Mlp::forward(std::span<const double> x, Tape& tape) const {
  if (x.size() != input_dim_) {
    throw std::invalid_argument("mlp: input length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(input_dim_));
  }
  tape.values.resize(layers_.size() + 1);
  tape.values[0].assign(x.begin(), x.end());
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    const double* w = params_.data() + l.offset;
    const double* b = w + l.out * l.in;
    const auto& in = tape.values[li];
    auto& out = tape.values[li + 1];
    out.resize(l.out);
    for (std::size_t r = 0; r < l.out; ++r) {
      double acc = b[r];
      const double* row = w + r * l.in;
      for (std::size_t c = 0; c < l.in; ++c) acc += row[c] * in[c];
      out[r] = activate(l.act, acc);
    }
  }
  return tape.values.back();
}

std::vector<double> Mlp::backward(const Tape& tape, std::span<const double> grad_out, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("mlp: gradient buffer has wrong size");
  if (grad_out.size() != output_dim()) throw std::invalid_argument("mlp: output gradient has wrong size");
  std::vector<double> delta(grad_out.begin(), grad_out.end());
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& l = layers_[li];
    const auto& in = tape.values[li];
    const auto& out = tape.values[li + 1];
    for (std::size_t r = 0; r < l.out; ++r) delta[r] *= activate_grad(l.act, out[r]);
    const double* w = params_.data() + l.offset;
    double* gw = grad.data() + l.offset;
    double* gb = gw + l.out * l.in;
    std::vector<double> prev(l.in, 0.0);
    for (std::size_t r = 0; r < l.out; ++r) {
      const double d = delta[r];
      gb[r] += d;
      if (d == 0.0) continue;
      const double* row = w + r * l.in;
      double* grow = gw + r * l.in;
      for (std::size_t c = 0; c < l.in; ++c) {
        grow[c] += d * in[c];
        prev[c] += d * row[c];
      }
    }
    delta = std::move(prev);
  }
  return delta;
}

std::vector<Tensor> Mlp::tensors() const {
  std::vector<Tensor> out;
  for (const auto& l : layers_) {
    const auto w0 = params_.begin() + static_cast<std::ptrdiff_t>(l.offset);
    const auto b0 = w0 + static_cast<std::ptrdiff_t>(l.out * l.in);
    out.emplace_back(std::vector<std::size_t>{l.out, l.in}, std::vector<double>(w0, b0));
    out.emplace_back(std::vector<std::size_t>{l.out}, std::vector<double>(b0, b0 + static_cast<std::ptrdiff_t>(l.out)));
  }
  return out;
}

void Mlp::load_tensors(const std::vector<Tensor>& tensors) {
  if (tensors.size() != 2 * layers_.size()) throw std::invalid_argument("mlp: tensor count mismatch");
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    const auto& w = tensors[2 * li];
    const auto& b = tensors[2 * li + 1];
    if (w.shape != std::vector<std::size_t>{l.out, l.in} || b.shape != std::vector<std::size_t>{l.out}) {
      throw std::invalid_argument("mlp: tensor shape mismatch in layer " + std::to_string(li));
    }
    std::copy(w.data.begin(), w.data.end(), params_.begin() + static_cast<std::ptrdiff_t>(l.offset));
    std::copy(b.data.begin(), b.data.end(), params_.begin() + static_cast<std::ptrdiff_t>(l.offset + l.out * l.in));
  }
}

}  // namespace udrl::nn
