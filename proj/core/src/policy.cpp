#include "udrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "udrl/errors.hpp"

namespace udrl {

std::vector<Vec> step_rows(const Controller& controller, const StepInputs& in, const Command* command,
                           const Vec& action) {
  if (!controller.layout().autoregressive) return {controller.encode(in, command)};
  const std::size_t o = controller.layout().dims.action;
  if (action.size() != o) throw std::invalid_argument("step_rows: action has wrong length");
  std::vector<Vec> rows;
  rows.reserve(o);
  for (std::size_t i = 0; i < o; ++i) {
    rows.push_back(controller.encode(in, command, MicroInput{i == 0 ? 0.0 : action[i - 1], i}));
  }
  return rows;
}

std::vector<Vec> step_targets(const Controller& controller, const Vec& action) {
  if (!controller.layout().autoregressive) return {action};
  std::vector<Vec> targets;
  targets.reserve(action.size());
  for (double a : action) targets.push_back(Vec{a});
  return targets;
}

Command perfect_life_command(const Vec& reward) {
  Command c;
  c.horizon = Vec(kHorizonDim, 0.0);
  c.desire = reward;
  c.morethan = false;
  c.marker = false;
  c.raw_steps = 0;
  return c;
}

std::string_view to_string(CommandMode mode) {
  return mode == CommandMode::initial_only ? "initial_only" : "per_step";
}

CommandMode command_mode_from_string(std::string_view s) {
  if (s == "per_step") return CommandMode::per_step;
  if (s == "initial_only") return CommandMode::initial_only;
  throw std::invalid_argument("unknown command mode '" + std::string(s) + "'");
}

std::string_view to_string(HorizonRule rule) {
  return rule == HorizonRule::twice_lifetime ? "twice_lifetime" : "remaining_in_trial";
}

HorizonRule horizon_rule_from_string(std::string_view s) {
  if (s == "remaining_in_trial") return HorizonRule::remaining_in_trial;
  if (s == "twice_lifetime") return HorizonRule::twice_lifetime;
  throw std::invalid_argument("unknown horizon rule '" + std::string(s) + "'");
}

Vec random_action(const envs::EnvSpec& spec, CounterRng& rng) {
  const std::size_t o = spec.dims.action;
  switch (spec.action_kind) {
    case envs::ActionKind::discrete: return one_hot(rng.uniform_index(o), o);
    case envs::ActionKind::continuous: {
      Vec a(o);
      for (auto& v : a) v = rng.uniform(spec.action_low, spec.action_high);
      return a;
    }
    case envs::ActionKind::multi_binary: {
      Vec a(o);
      for (auto& v : a) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
      return a;
    }
  }
  return {};
}

namespace {

void check_finite(std::span<const double> raw) {
  for (double v : raw) {
    if (!std::isfinite(v)) throw DivergenceError("controller produced a non-finite output");
  }
}

std::size_t sample_categorical(std::span<const double> p, CounterRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // Rounding left u above the total: take the last action with mass.
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) return i;
  }
  return p.size() - 1;
}

}  // namespace

Vec sample_action(const Controller& controller, std::span<const double> raw, const envs::EnvSpec& spec, bool greedy,
                  CounterRng& rng) {
  check_finite(raw);
  const nn::OutputHead& head = controller.head();
  const std::size_t o = spec.dims.action;
  if (head.kind() == nn::HeadKind::gaussian) {
    const Vec mv = head.transform(raw);
    Vec a(o);
    for (std::size_t i = 0; i < o; ++i) {
      const double x = greedy ? mv[i] : mv[i] + std::sqrt(mv[o + i]) * rng.normal();
      a[i] = std::clamp(x, spec.action_low, spec.action_high);
    }
    return a;
  }
  if (spec.action_kind == envs::ActionKind::multi_binary) {
    const Vec p = head.transform(raw);
    Vec a(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) a[i] = (greedy ? p[i] > 0.5 : rng.bernoulli(p[i])) ? 1.0 : 0.0;
    return a;
  }
  const Vec p = head.probabilities(raw);
  return one_hot(greedy ? argmax(p) : sample_categorical(p, rng), o);
}

Vec policy_action(const Controller& controller, const envs::EnvSpec& spec, const StepInputs& in, const Command* command,
                  bool greedy, CounterRng& rng, nn::RecurrentNet::State* state) {
  if (controller.recurrent() && !state) throw std::invalid_argument("policy_action: recurrent controller needs a state");
  auto run = [&](const Vec& x) { return controller.recurrent() ? controller.step(x, *state) : controller.forward(x); };
  if (!controller.layout().autoregressive) return sample_action(controller, run(controller.encode(in, command)), spec,
                                                                greedy, rng);
  const std::size_t o = controller.layout().dims.action;
  Vec action(o, 0.0);
  double prev = 0.0;
  for (std::size_t i = 0; i < o; ++i) {
    const Vec raw = run(controller.encode(in, command, MicroInput{prev, i}));
    check_finite(raw);
    const double p = controller.head().transform(raw)[0];
    action[i] = (greedy ? p > 0.5 : rng.bernoulli(p)) ? 1.0 : 0.0;
    prev = action[i];
  }
  return action;
}

Command step_command(const TrialCommand& trial, const Vec& achieved, std::size_t t, const HorizonScheme& scheme,
                     const RolloutOptions& options) {
  if (t == 0) throw std::out_of_range("step_command: steps are 1-based");
  Vec desire(trial.desire.size());
  for (std::size_t i = 0; i < desire.size(); ++i) desire[i] = trial.desire[i] - achieved.at(i);
  std::size_t steps = 0;
  if (options.horizon_rule == HorizonRule::twice_lifetime) {
    steps = 2 * (static_cast<std::size_t>(options.lifetime_steps) + t - 1);
  } else {
    steps = trial.horizon_steps >= t ? trial.horizon_steps - t : 0;
  }
  Command c = make_command(steps, std::move(desire), scheme, trial.morethan);
  c.goal_obs = trial.goal_obs;
  if (options.omit_horizon) c.horizon.assign(kHorizonDim, 0.0);
  return c;
}

RolloutResult rollout(envs::Environment& env, const Controller& controller, const TrialCommand& command,
                      const RolloutOptions& options, std::uint64_t env_seed, CounterRng& rng,
                      nn::RecurrentNet::State* carry) {
  const envs::EnvSpec& spec = env.spec();
  if (controller.layout().dims != spec.dims) {
    throw std::invalid_argument("rollout: controller dimensions do not match environment '" + spec.name + "'");
  }
  if (command.desire.size() != spec.dims.reward) throw std::invalid_argument("rollout: desire has wrong length");
  const bool rnn = controller.recurrent();
  const bool marker_mode = options.command_mode == CommandMode::initial_only;
  if (marker_mode && !rnn) throw std::invalid_argument("rollout: initial-only commands need a recurrent controller");

  Vec obs = env.reset(env_seed);
  EpisodeRecorder rec(spec.name, env_seed, spec.dims, obs);
  RolloutResult result;
  nn::RecurrentNet::State memory;
  if (rnn) memory = carry ? *carry : controller.initial_state();
  Vec achieved(spec.dims.reward, 0.0);
  double norm_sum = 0.0;

  for (std::size_t t = 1; !env.done(); ++t) {
    if (rnn && options.hidden_reset_step != 0 && t == options.hidden_reset_step) memory = controller.initial_state();
    const StepInputs in{rec.last_action(), rec.current_observation(), rec.last_reward(),
                        static_cast<double>(options.lifetime_steps + t - 1)};
    Command live = step_command(command, achieved, t, controller.spec().horizon, options);
    if (marker_mode && t > 1) live = null_command(spec.dims.reward);
    if (options.omit_horizon) live.marker = true;

    Vec action;
    const bool explore_now = options.explore && rng.uniform() < options.explore_fraction;
    nn::RecurrentNet::State live_state = memory;
    const Command* cmd = controller.command_free() ? nullptr : &live;
    if (explore_now) {
      action = random_action(spec, rng);
    } else {
      action = policy_action(controller, spec, in, cmd, options.greedy, rng, rnn ? &live_state : nullptr);
    }

    const envs::StepResult sr = env.step(action);
    if (rnn) {
      if (marker_mode || controller.command_free()) {
        // The live stream is the memory; feed it even on explored steps.
        for (const Vec& x : step_rows(controller, in, cmd, action)) controller.step(x, memory);
      } else {
        const Command pl = perfect_life_command(sr.reward);
        for (const Vec& x : step_rows(controller, in, &pl, action)) controller.step(x, memory);
      }
      double n2 = 0.0;
      for (double h : memory.h) n2 += h * h;
      norm_sum += std::sqrt(n2);
    }
    for (std::size_t i = 0; i < achieved.size(); ++i) achieved[i] += sr.reward.at(i);
    result.commands.push_back(std::move(live));
    rec.record(action, sr.reward, sr.observation);
  }
  if (rnn && carry) *carry = memory;
  result.mean_hidden_norm = result.commands.empty() ? 0.0 : norm_sum / static_cast<double>(result.commands.size());
  result.episode = std::move(rec).finish();
  return result;
}

}  // namespace udrl
