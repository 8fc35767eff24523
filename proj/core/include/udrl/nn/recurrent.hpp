#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "udrl/nn/tensor.hpp"
#include "udrl/rng.hpp"

namespace udrl::nn {

enum class CellKind { elman, lstm };

std::string_view to_string(CellKind kind);
CellKind cell_from_string(std::string_view s);

// Single recurrent layer followed by a linear output projection.
//   elman: h = tanh(Wx x + Wh h' + b)
//   lstm:  [i f g o] = [sig sig tanh sig](Wx x + Wh h' + b)
//          c = f * c' + i * g,  h = o * tanh(c)   (forget gate included)
//   y = Wo h + bo
// Parameter layout: Wx (G*H x I), Wh (G*H x H), b (G*H), Wo (O x H), bo (O),
// with G = 1 (elman) or 4 (lstm, gate blocks in i, f, g, o order).
class RecurrentNet {
 public:
  struct State {
    std::vector<double> h;
    std::vector<double> c;  // empty for elman
    bool operator==(const State&) const = default;
  };

  struct Tape {
    struct Step {
      std::vector<double> x, h_prev, c_prev, gates, c, tanh_c, h;
    };
    std::vector<Step> steps;
  };

  RecurrentNet() = default;
  RecurrentNet(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim, CellKind kind);

  void initialize(CounterRng& rng);

  CellKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  State initial_state() const;

  // One tick: advances `state` and returns the output projection.
  std::vector<double> step(std::span<const double> x, State& state) const;

  // Runs the sequence from `state`, leaving the final hidden state in it.
  std::vector<std::vector<double>> unroll(std::span<const std::vector<double>> xs, State& state,
                                          Tape* tape = nullptr) const;

  // Backpropagation through the taped steps. grad_outputs[t] may be empty
  // (no loss at that step). Accumulates into `grad`.
  void backward(const Tape& tape, std::span<const std::vector<double>> grad_outputs, std::span<double> grad) const;

  std::vector<Tensor> tensors() const;
  void load_tensors(const std::vector<Tensor>& tensors);

  bool operator==(const RecurrentNet&) const = default;

 private:
  std::size_t gates() const { return kind_ == CellKind::lstm ? 4 : 1; }
  std::size_t off_wh() const { return gates() * hidden_dim_ * input_dim_; }
  std::size_t off_b() const { return off_wh() + gates() * hidden_dim_ * hidden_dim_; }
  std::size_t off_wo() const { return off_b() + gates() * hidden_dim_; }
  std::size_t off_bo() const { return off_wo() + output_dim_ * hidden_dim_; }

  std::vector<double> cell_step(std::span<const double> x, State& state, Tape::Step* rec) const;

  CellKind kind_ = CellKind::lstm;
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<double> params_;
};

}  // namespace udrl::nn
