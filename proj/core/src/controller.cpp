#include "udrl/controller.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "udrl/errors.hpp"

namespace udrl {

using nlohmann::json;

std::string_view to_string(NetKind kind) { return kind == NetKind::rnn ? "rnn" : "ffw"; }

NetKind net_from_string(std::string_view s) {
  if (s == "ffw") return NetKind::ffw;
  if (s == "rnn") return NetKind::rnn;
  throw std::invalid_argument("unknown learner kind '" + std::string(s) + "'");
}

StepInputs step_inputs(const Episode& episode, std::size_t t) {
  const Transition& tr = episode.step(t);
  return StepInputs{tr.prev_action, tr.observation, episode.input_reward(t), static_cast<double>(t - 1)};
}

void ControllerSpec::validate() const {
  if (layout.dims.obs == 0 || layout.dims.reward == 0 || layout.dims.action == 0) {
    throw std::invalid_argument("controller: dimensions must be positive");
  }
  if (layout.autoregressive && head != nn::HeadKind::sigmoid) {
    throw std::invalid_argument("controller: autoregressive actions need a sigmoid head");
  }
  if (net == NetKind::rnn && hidden_dim == 0) throw std::invalid_argument("controller: hidden_dim must be positive");
  if (!(desire_scale > 0.0) || !std::isfinite(desire_scale)) {
    throw std::invalid_argument("controller: desire_scale must be positive");
  }
  if (!(step_scale > 0.0)) throw std::invalid_argument("controller: step_scale must be positive");
  horizon.validate();
}

Controller::Controller(ControllerSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  head_ = nn::OutputHead(spec_.head, spec_.head_dim());
  CounterRng rng(seed, 0x1417);
  if (recurrent()) {
    rnn_ = nn::RecurrentNet(spec_.layout.size(), spec_.hidden_dim, head_.raw_dim(), spec_.cell);
    rnn_.initialize(rng);
  } else {
    mlp_ = nn::Mlp(spec_.layout.size(), spec_.hidden, head_.raw_dim(), spec_.activation);
    mlp_.initialize(rng);
  }
}

void Controller::set_desire_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("controller: desire_scale must be positive");
  spec_.desire_scale = scale;
}

void Controller::set_horizon_scheme(const HorizonScheme& scheme) {
  scheme.validate();
  spec_.horizon = scheme;
}

std::span<double> Controller::params() { return recurrent() ? rnn_.params() : mlp_.params(); }
std::span<const double> Controller::params() const { return recurrent() ? rnn_.params() : mlp_.params(); }

namespace {

void append(Vec& out, std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw std::invalid_argument(std::string("controller input: ") + what + " has length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(expected));
  }
  out.insert(out.end(), v.begin(), v.end());
}

}  // namespace

Vec Controller::encode(const StepInputs& in, const Command* command, std::optional<MicroInput> micro) const {
  const InputLayout& l = spec_.layout;
  Vec x;
  x.reserve(l.size());
  append(x, in.prev_action, l.dims.action, "prev_action");
  append(x, in.observation, l.dims.obs, "observation");
  append(x, in.prev_reward, l.dims.reward, "prev_reward");
  if (l.commands) {
    if (!command) throw std::invalid_argument("controller input: command required");
    append(x, command->horizon, kHorizonDim, "horizon");
    if (command->desire.size() != l.dims.reward) throw std::invalid_argument("controller input: desire has wrong length");
    for (double d : command->desire) x.push_back(d / spec_.desire_scale);
    x.push_back(command->morethan ? 1.0 : 0.0);
    x.push_back(command->marker ? 1.0 : 0.0);
    if (command->goal_obs) {
      append(x, *command->goal_obs, l.dims.obs, "goal");
    } else {
      x.insert(x.end(), l.dims.obs, 0.0);
    }
  } else if (command) {
    throw std::invalid_argument("controller input: command-free policy takes no command");
  }
  if (l.step_counter) x.push_back(in.step / spec_.step_scale);
  if (l.autoregressive) {
    if (!micro) throw std::invalid_argument("controller input: micro-step input required");
    if (micro->index >= l.dims.action) throw std::out_of_range("controller input: micro-step index out of range");
    x.push_back(micro->prev_component);
    for (std::size_t i = 0; i < l.dims.action; ++i) x.push_back(i == micro->index ? 1.0 : 0.0);
  } else if (micro) {
    throw std::invalid_argument("controller input: micro-step input given to a non-autoregressive controller");
  }
  return x;
}

Vec Controller::forward(std::span<const double> input) const {
  if (recurrent()) throw std::logic_error("controller: forward() on a recurrent controller");
  return mlp_.forward(input);
}

nn::RecurrentNet::State Controller::initial_state() const {
  if (!recurrent()) throw std::logic_error("controller: initial_state() on a feedforward controller");
  return rnn_.initial_state();
}

Vec Controller::step(std::span<const double> input, nn::RecurrentNet::State& state) const {
  if (!recurrent()) throw std::logic_error("controller: step() on a feedforward controller");
  return rnn_.step(input, state);
}

std::string spec_to_json(const ControllerSpec& s) {
  json j;
  j["net"] = std::string(to_string(s.net));
  j["dims"] = {s.layout.dims.obs, s.layout.dims.reward, s.layout.dims.action};
  j["commands"] = s.layout.commands;
  j["step_counter"] = s.layout.step_counter;
  j["autoregressive"] = s.layout.autoregressive;
  j["head"] = std::string(nn::to_string(s.head));
  j["hidden"] = s.hidden;
  j["activation"] = std::string(nn::to_string(s.activation));
  j["cell"] = std::string(nn::to_string(s.cell));
  j["hidden_dim"] = s.hidden_dim;
  j["horizon"] = {{"kind", std::string(to_string(s.horizon.kind))},
                  {"gamma", s.horizon.gamma},
                  {"scale", s.horizon.scale}};
  j["desire_scale"] = s.desire_scale;
  j["step_scale"] = s.step_scale;
  return j.dump();
}

ControllerSpec spec_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ControllerSpec s;
    s.net = net_from_string(j.at("net").get<std::string>());
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 3) throw IoError("controller metadata: dims must have 3 entries");
    s.layout.dims = Dims{dims[0], dims[1], dims[2]};
    s.layout.commands = j.at("commands").get<bool>();
    s.layout.step_counter = j.at("step_counter").get<bool>();
    s.layout.autoregressive = j.at("autoregressive").get<bool>();
    s.head = nn::head_from_string(j.at("head").get<std::string>());
    s.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    s.activation = nn::activation_from_string(j.at("activation").get<std::string>());
    s.cell = nn::cell_from_string(j.at("cell").get<std::string>());
    s.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    const json& h = j.at("horizon");
    s.horizon.kind = horizon_from_string(h.at("kind").get<std::string>());
    s.horizon.gamma = h.at("gamma").get<double>();
    s.horizon.scale = h.at("scale").get<double>();
    s.desire_scale = j.at("desire_scale").get<double>();
    s.step_scale = j.at("step_scale").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("controller metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("controller metadata: ") + e.what());
  }
}

nn::Checkpoint Controller::to_checkpoint() const {
  nn::Checkpoint ckpt;
  ckpt.flags = command_free() ? nn::kFlagCommandFree : 0u;
  ckpt.metadata = spec_to_json(spec_);
  ckpt.tensors = recurrent() ? rnn_.tensors() : mlp_.tensors();
  return ckpt;
}

Controller Controller::from_checkpoint(const nn::Checkpoint& ckpt) {
  ControllerSpec spec = spec_from_json(ckpt.metadata);
  if (((ckpt.flags & nn::kFlagCommandFree) != 0) == spec.layout.commands) {
    throw IoError("checkpoint: command-free flag disagrees with metadata");
  }
  Controller c;
  try {
    c = Controller(spec, 0);
    if (c.recurrent()) {
      c.rnn_.load_tensors(ckpt.tensors);
    } else {
      c.mlp_.load_tensors(ckpt.tensors);
    }
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
  return c;
}

void Controller::save(const std::filesystem::path& path) const { nn::save_checkpoint(path, to_checkpoint()); }

Controller Controller::load(const std::filesystem::path& path) { return from_checkpoint(nn::load_checkpoint(path)); }

}  // namespace udrl
