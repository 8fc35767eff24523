#include "udrl/learner_b.hpp"

#include <stdexcept>

#include "udrl/errors.hpp"

namespace udrl {

std::vector<Command> perfect_life_commands(const Episode& episode, std::size_t upto) {
  if (upto > episode.size() + 1) throw std::out_of_range("perfect_life_commands: upto beyond episode");
  std::vector<Command> out;
  for (std::size_t t = 1; t < upto; ++t) out.push_back(perfect_life_command(episode.step(t).reward));
  return out;
}

namespace {

Vec all_of(const StepInputs& in) {
  Vec v = in.prev_action;
  v.insert(v.end(), in.observation.begin(), in.observation.end());
  v.insert(v.end(), in.prev_reward.begin(), in.prev_reward.end());
  return v;
}

}  // namespace

std::vector<HistoryStep> training_history(const Episode& episode, const SegmentSample& sample, CommandMode mode) {
  if (sample.k < 1 || sample.k > sample.j || sample.j > episode.size()) {
    throw std::out_of_range("training_history: segment out of range");
  }
  std::vector<HistoryStep> h;
  if (mode == CommandMode::initial_only) {
    if (sample.k != 1) throw std::invalid_argument("training_history: initial-only samples start at step 1");
    for (std::size_t t = 1; t <= sample.j; ++t) {
      h.push_back({all_of(step_inputs(episode, t)), t == 1 ? sample.command : null_command(episode.dims().reward),
                   episode.step(t).action});
    }
    return h;
  }
  const auto prefix = perfect_life_commands(episode, sample.k);
  for (std::size_t t = 1; t < sample.k; ++t) {
    h.push_back({all_of(step_inputs(episode, t)), prefix[t - 1], episode.step(t).action});
  }
  h.push_back({all_of(step_inputs(episode, sample.k)), sample.command, episode.step(sample.k).action});
  return h;
}

nn::SequenceExample build_sequence(const Controller& controller, const Episode& episode, const SegmentSample& sample,
                                   CommandMode mode) {
  const auto history = training_history(episode, sample, mode);
  nn::SequenceExample seq;
  seq.initial = controller.initial_state();
  for (std::size_t i = 0; i < history.size(); ++i) {
    const std::size_t t = i + 1;
    const bool masked = mode == CommandMode::initial_only || t == sample.k;
    const StepInputs in = step_inputs(episode, t);
    const Command* cmd = controller.command_free() ? nullptr : &history[i].command;
    const auto rows = step_rows(controller, in, cmd, history[i].action_taken);
    const auto targets = step_targets(controller, history[i].action_taken);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      seq.inputs.push_back(rows[r]);
      seq.targets.push_back(targets[r]);
      seq.mask.push_back(masked ? 1.0 : 0.0);
    }
  }
  return seq;
}

std::vector<SegmentSample> sample_initial_batch(const ReplayBuffer& buffer, std::size_t batch_size,
                                                const RelabelMix& mix, const HorizonScheme& scheme, CounterRng& rng,
                                                RelabelCounts* counts) {
  if (buffer.empty()) throw NoDataError("replay buffer holds no episodes");
  mix.validate();
  std::vector<SegmentSample> batch;
  batch.reserve(batch_size);
  const auto& entries = buffer.entries();
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto& stored = entries[rng.uniform_index(entries.size())];
    const Episode& ep = stored.episode;
    const std::size_t j = 1 + rng.uniform_index(ep.size());
    const double u = rng.uniform();
    if (u < mix.exact) {
      batch.push_back(relabel_segment(ep, 1, j, scheme, stored.id));
      if (counts) ++counts->by_kind[0];
    } else if (u < mix.exact + mix.morethan) {
      const double f = mix.fractions[rng.uniform_index(mix.fractions.size())];
      batch.push_back(relabel_morethan(ep, 1, j, f, scheme, stored.id));
      if (counts) ++counts->by_kind[1];
    } else {
      batch.push_back(relabel_goal(ep, 1, j, scheme, stored.id));
      if (counts) ++counts->by_kind[2];
    }
  }
  return batch;
}

double train_epoch_rnn(Controller& controller, const ReplayBuffer& buffer, const BatchConfig& batch,
                       nn::Optimizer& optimizer, CounterRng& rng, EpochStats* stats) {
  if (!controller.recurrent()) throw std::invalid_argument("train_epoch_rnn: recurrent controller expected");
  batch.validate();
  if (buffer.empty()) throw NoDataError("replay buffer holds no episodes");
  const HorizonScheme& scheme = controller.spec().horizon;
  RelabelCounts counts;
  double loss_sum = 0.0;
  std::vector<nn::SequenceExample> seqs;
  for (std::size_t b = 0; b < batch.batches; ++b) {
    const auto samples = batch.command_mode == CommandMode::initial_only
                             ? sample_initial_batch(buffer, batch.batch_size, batch.mix, scheme, rng, &counts)
                             : sample_batch(buffer, batch.batch_size, batch.mix, scheme, rng, {}, &counts);
    seqs.clear();
    for (const auto& raw : samples) {
      const Episode& ep = *buffer.find(raw.episode_ref);
      seqs.push_back(build_sequence(controller, ep, prepare_sample(raw, ep, batch, scheme), batch.command_mode));
    }
    loss_sum += nn::bptt_step(controller.rnn(), controller.head(), seqs, batch.loss, optimizer, batch.bptt_window);
  }
  const double mean = loss_sum / static_cast<double>(batch.batches);
  if (stats) *stats = EpochStats{mean, counts};
  return mean;
}

RolloutResult run_trial_rnn(envs::Environment& env, const Controller& controller, const ActorConfig& config,
                            ReplayBuffer& buffer, CounterRng& rng, std::uint64_t env_seed,
                            const RnnTrialOptions& options, nn::RecurrentNet::State* life) {
  config.validate();
  const std::uint64_t lived =
      options.single_life && !buffer.empty() ? buffer.entries().back().episode.size() : 0;
  RolloutOptions ro = rollout_options(config, true, lived);
  ro.hidden_reset_step = options.hidden_reset_step;
  const TrialCommand cmd = exploit_command(config, buffer, env.spec());
  RolloutResult r = rollout(env, controller, cmd, ro, env_seed, rng, options.single_life ? life : nullptr);
  if (options.single_life) {
    buffer.extend_last(r.episode);
  } else {
    buffer.add_episode(r.episode);
  }
  return r;
}

std::vector<double> marker_sequence(const std::vector<Command>& commands) {
  std::vector<double> m;
  m.reserve(commands.size());
  for (const auto& c : commands) m.push_back(c.marker ? 1.0 : 0.0);
  return m;
}

Vec act_autoregressive(const Controller& controller, const envs::EnvSpec& spec, const StepInputs& in,
                       const Command* command, CounterRng& rng, nn::RecurrentNet::State* state) {
  if (!controller.layout().autoregressive || spec.action_kind != envs::ActionKind::multi_binary) {
    throw std::invalid_argument("act_autoregressive: autoregressive controller and multi-binary actions required");
  }
  return policy_action(controller, spec, in, command, false, rng, state);
}

std::vector<double> autoregressive_joint(const Controller& controller, const StepInputs& in, const Command* command,
                                         const nn::RecurrentNet::State* state) {
  if (!controller.layout().autoregressive) throw std::invalid_argument("autoregressive_joint: not autoregressive");
  const std::size_t o = controller.layout().dims.action;
  if (o > 16) throw std::invalid_argument("autoregressive_joint: too many components to enumerate");
  if (controller.recurrent() && !state) throw std::invalid_argument("autoregressive_joint: state required");
  std::vector<double> joint(std::size_t{1} << o, 0.0);

  auto p_one = [&](std::size_t i, double prev, nn::RecurrentNet::State* s) {
    const Vec x = controller.encode(in, command, MicroInput{prev, i});
    const Vec raw = controller.recurrent() ? controller.step(x, *s) : controller.forward(x);
    return controller.head().transform(raw)[0];
  };
  // Depth-first over prefixes; each branch carries its own copy of the state.
  struct Frame {
    std::size_t i;
    std::size_t pattern;
    double prob;
    double prev;
    nn::RecurrentNet::State s;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 0, 1.0, 0.0, state ? *state : nn::RecurrentNet::State{}});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.i == o) {
      joint[f.pattern] += f.prob;
      continue;
    }
    const double p = p_one(f.i, f.prev, &f.s);
    stack.push_back({f.i + 1, f.pattern, f.prob * (1.0 - p), 0.0, f.s});
    stack.push_back({f.i + 1, f.pattern | (std::size_t{1} << f.i), f.prob * p, 1.0, std::move(f.s)});
  }
  return joint;
}

}  // namespace udrl
