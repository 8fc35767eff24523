#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udrl/command.hpp"
#include "udrl/episode.hpp"
#include "udrl/nn/checkpoint.hpp"
#include "udrl/nn/loss.hpp"
#include "udrl/nn/mlp.hpp"
#include "udrl/nn/recurrent.hpp"

namespace udrl {

enum class NetKind { ffw, rnn };

std::string_view to_string(NetKind kind);
NetKind net_from_string(std::string_view s);

// Input vector, in order:
//   prev_action (o) | observation (m) | prev_reward (n)          -- all(t)
//   horizon (1) | desire (n) | morethan | marker | goal (m)       -- command
//   step counter (1)                                              -- optional
//   previous component (1) | micro-step one-hot (o)               -- autoregressive
// A command-free layout (distilled policy) has no command block at all.
struct InputLayout {
  Dims dims;
  bool commands = true;
  bool step_counter = false;
  bool autoregressive = false;

  std::size_t all_size() const { return dims.action + dims.obs + dims.reward; }
  std::size_t command_size() const { return commands ? kHorizonDim + dims.reward + 2 + dims.obs : 0; }
  std::size_t size() const {
    return all_size() + command_size() + (step_counter ? 1 : 0) + (autoregressive ? 1 + dims.action : 0);
  }
  bool operator==(const InputLayout&) const = default;
};

// Per-step observation part of the input, all(t).
struct StepInputs {
  Vec prev_action;
  Vec observation;
  Vec prev_reward;
  double step = 0.0;  // raw step index; scaled by ControllerSpec::step_scale
};

// Inputs of step t of a recorded episode (t = 1..T).
StepInputs step_inputs(const Episode& episode, std::size_t t);

// Micro-step inputs for autoregressive action sampling.
struct MicroInput {
  double prev_component = 0.0;
  std::size_t index = 0;
};

struct ControllerSpec {
  NetKind net = NetKind::ffw;
  InputLayout layout;
  nn::HeadKind head = nn::HeadKind::softmax;
  // ffw
  std::vector<std::size_t> hidden = {64, 64};
  nn::Activation activation = nn::Activation::tanh;
  // rnn
  nn::CellKind cell = nn::CellKind::lstm;
  std::size_t hidden_dim = 32;

  HorizonScheme horizon;
  double desire_scale = 1.0;  // desire inputs are divided by this
  double step_scale = 1.0;

  // Action units produced per forward pass (1 for autoregressive).
  std::size_t head_dim() const { return layout.autoregressive ? 1 : layout.dims.action; }
  void validate() const;
  bool operator==(const ControllerSpec&) const = default;
};

// Command-conditioned controller C (or command-free policy CC): network,
// output head and the input encoding that goes with them.
class Controller {
 public:
  Controller() = default;
  Controller(ControllerSpec spec, std::uint64_t seed);

  const ControllerSpec& spec() const { return spec_; }
  const InputLayout& layout() const { return spec_.layout; }
  const nn::OutputHead& head() const { return head_; }
  bool recurrent() const { return spec_.net == NetKind::rnn; }
  bool command_free() const { return !spec_.layout.commands; }

  void set_desire_scale(double scale);
  void set_horizon_scheme(const HorizonScheme& scheme);

  std::span<double> params();
  std::span<const double> params() const;
  std::size_t num_params() const { return params().size(); }

  nn::Mlp& mlp() { return mlp_; }
  const nn::Mlp& mlp() const { return mlp_; }
  nn::RecurrentNet& rnn() { return rnn_; }
  const nn::RecurrentNet& rnn() const { return rnn_; }

  // `command` must be null exactly when the layout is command-free, and
  // `micro` present exactly when it is autoregressive.
  Vec encode(const StepInputs& in, const Command* command, std::optional<MicroInput> micro = std::nullopt) const;

  // Feedforward pass (ffw only); raw head inputs.
  Vec forward(std::span<const double> input) const;

  // Recurrent tick (rnn only).
  nn::RecurrentNet::State initial_state() const;
  Vec step(std::span<const double> input, nn::RecurrentNet::State& state) const;

  nn::Checkpoint to_checkpoint() const;
  static Controller from_checkpoint(const nn::Checkpoint& ckpt);
  void save(const std::filesystem::path& path) const;
  static Controller load(const std::filesystem::path& path);

  bool operator==(const Controller&) const = default;

 private:
  ControllerSpec spec_;
  nn::OutputHead head_;
  nn::Mlp mlp_;
  nn::RecurrentNet rnn_;
};

std::string spec_to_json(const ControllerSpec& spec);
ControllerSpec spec_from_json(const std::string& text);

}  // namespace udrl
