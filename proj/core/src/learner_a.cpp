#include "udrl/learner_a.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "udrl/errors.hpp"
#include "udrl/nn/train.hpp"

namespace udrl {

std::string_view to_string(DesireRule rule) {
  return rule == DesireRule::upper_bound ? "upper_bound" : "max_seen_x2_floor_c";
}

DesireRule desire_rule_from_string(std::string_view s) {
  if (s == "max_seen_x2_floor_c") return DesireRule::max_seen_x2_floor_c;
  if (s == "upper_bound") return DesireRule::upper_bound;
  throw std::invalid_argument("unknown desire rule '" + std::string(s) + "'");
}

void ActorConfig::validate() const {
  if (!(explore_fraction >= 0.0 && explore_fraction <= 1.0)) {
    throw std::invalid_argument("actor: explore_fraction must lie in [0, 1]");
  }
  if (!(desire_floor > 0.0)) throw std::invalid_argument("actor: desire floor c must be positive");
  if (!std::isfinite(desire_bound)) throw std::invalid_argument("actor: desire bound must be finite");
}

RolloutOptions rollout_options(const ActorConfig& config, bool explore, std::uint64_t lifetime_steps) {
  RolloutOptions o;
  o.explore = explore;
  o.explore_fraction = config.explore_fraction;
  o.greedy = config.greedy;
  o.horizon_rule = config.horizon_rule;
  o.omit_horizon = config.omit_horizon;
  o.command_mode = config.command_mode;
  o.lifetime_steps = lifetime_steps;
  return o;
}

TrialCommand exploit_command(const ActorConfig& config, const ReplayBuffer& buffer, const envs::EnvSpec& spec) {
  double total = config.desire_bound;
  if (config.desire_rule == DesireRule::max_seen_x2_floor_c) {
    total = config.desire_floor;
    if (std::isfinite(buffer.best_return())) total = std::max(total, 2.0 * buffer.best_return());
  }
  TrialCommand cmd;
  cmd.desire.assign(spec.dims.reward, total / static_cast<double>(spec.dims.reward));
  cmd.horizon_steps = spec.max_steps;
  cmd.morethan = config.morethan_at_exploit;
  return cmd;
}

Vec act(const Controller& controller, const envs::EnvSpec& spec, const StepInputs& in, const Command& command,
        bool explore, const ActorConfig& config, CounterRng& rng, nn::RecurrentNet::State* state) {
  if (explore && rng.uniform() < config.explore_fraction) return random_action(spec, rng);
  return policy_action(controller, spec, in, controller.command_free() ? nullptr : &command, config.greedy, rng,
                       state);
}

Episode run_trial(envs::Environment& env, const Controller& controller, const ActorConfig& config,
                  ReplayBuffer& buffer, CounterRng& rng, std::uint64_t env_seed) {
  config.validate();
  const TrialCommand cmd = exploit_command(config, buffer, env.spec());
  RolloutResult r = rollout(env, controller, cmd, rollout_options(config, true), env_seed, rng);
  buffer.add_episode(r.episode);
  return std::move(r.episode);
}

void BatchConfig::validate() const {
  if (batches == 0) throw std::invalid_argument("batch: batches must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch: batch_size must be positive");
  if (bptt_window == 0) throw std::invalid_argument("batch: bptt_window must be positive");
  mix.validate();
}

SegmentSample prepare_sample(const SegmentSample& sample, const Episode& episode, const BatchConfig& batch,
                             const HorizonScheme& scheme) {
  SegmentSample s = sample;
  if (batch.expected_rewards && s.kind == RelabelKind::exact) {
    s = relabel_expected(episode, s.k, s.j, *batch.expected_rewards, scheme, s.episode_ref);
  }
  if (batch.omit_horizon) {
    s.command.horizon.assign(kHorizonDim, 0.0);
    s.command.marker = s.j == episode.size();
  }
  return s;
}

double train_epoch(Controller& controller, const ReplayBuffer& buffer, const BatchConfig& batch,
                   nn::Optimizer& optimizer, CounterRng& rng, EpochStats* stats) {
  if (controller.recurrent()) throw std::invalid_argument("train_epoch: feedforward controller expected");
  batch.validate();
  if (buffer.empty()) throw NoDataError("replay buffer holds no episodes");
  const HorizonScheme& scheme = controller.spec().horizon;
  RelabelCounts counts;
  double loss_sum = 0.0;
  std::vector<nn::Example> examples;
  for (std::size_t b = 0; b < batch.batches; ++b) {
    examples.clear();
    for (const auto& raw : sample_batch(buffer, batch.batch_size, batch.mix, scheme, rng, {}, &counts)) {
      const Episode& ep = *buffer.find(raw.episode_ref);
      const SegmentSample s = prepare_sample(raw, ep, batch, scheme);
      const auto rows = step_rows(controller, step_inputs(ep, s.k), &s.command, s.target_action);
      const auto targets = step_targets(controller, s.target_action);
      for (std::size_t i = 0; i < rows.size(); ++i) examples.push_back({rows[i], targets[i]});
    }
    loss_sum += nn::train_step(controller.mlp(), controller.head(), examples, batch.loss, optimizer);
  }
  const double mean = loss_sum / static_cast<double>(batch.batches);
  if (stats) *stats = EpochStats{mean, counts};
  return mean;
}

RewardTable::RewardTable(std::size_t states, std::size_t actions)
    : states_(states), actions_(actions), entries_(states * actions) {
  if (states == 0 || actions == 0) throw std::invalid_argument("reward table: sizes must be positive");
}

const RewardTable::Entry& RewardTable::at(std::size_t state, std::size_t action) const {
  if (state >= states_ || action >= actions_) throw std::out_of_range("reward table: index out of range");
  return entries_[state * actions_ + action];
}

void RewardTable::update(std::size_t state, std::size_t action, double reward) {
  if (state >= states_ || action >= actions_) throw std::out_of_range("reward table: index out of range");
  Entry& e = entries_[state * actions_ + action];
  ++e.count;
  e.mean += (reward - e.mean) / static_cast<double>(e.count);
}

void update_reward_table(RewardTable& table, std::size_t state, std::size_t action, double observed_reward) {
  table.update(state, action, observed_reward);
}

std::size_t tabular_state(const Vec& observation) { return argmax(observation); }

namespace {

double reward_sum(const Vec& r) {
  double s = 0.0;
  for (double v : r) s += v;
  return s;
}

}  // namespace

void update_reward_table(RewardTable& table, const Episode& episode) {
  for (const auto& tr : episode.transitions()) {
    table.update(tabular_state(tr.observation), argmax(tr.action), reward_sum(tr.reward));
  }
}

SegmentSample relabel_expected(const Episode& episode, std::size_t k, std::size_t j, const RewardTable& table,
                               const HorizonScheme& scheme, std::uint64_t episode_ref) {
  SegmentSample s = relabel_segment(episode, k, j, scheme, episode_ref);
  if (episode.dims().reward != 1) throw std::invalid_argument("relabel_expected: scalar rewards required");
  double desire = 0.0;
  for (std::size_t t = k; t <= j; ++t) {
    const Transition& tr = episode.step(t);
    const std::size_t state = tabular_state(tr.observation);
    const std::size_t action = argmax(tr.action);
    if (table.count(state, action) == 0) {
      throw EstimateMissingError("no reward estimate for state " + std::to_string(state) + ", action " +
                                 std::to_string(action));
    }
    desire += table.mean(state, action);
  }
  s.command.desire = Vec{desire};
  s.kind = RelabelKind::expected;
  return s;
}

TabularModel::TabularModel(std::size_t states, std::size_t actions)
    : rewards_(states, actions), counts_(states * actions * states, 0) {}

void TabularModel::observe(std::size_t state, std::size_t action, double reward, std::size_t next_state) {
  if (next_state >= states()) throw std::out_of_range("tabular model: next state out of range");
  rewards_.update(state, action, reward);
  ++counts_[(state * actions() + action) * states() + next_state];
}

void TabularModel::observe(const Episode& episode) {
  for (std::size_t t = 1; t <= episode.size(); ++t) {
    const Transition& tr = episode.step(t);
    observe(tabular_state(tr.observation), argmax(tr.action), reward_sum(tr.reward),
            tabular_state(episode.observation(t + 1)));
  }
}

std::uint64_t TabularModel::transitions(std::size_t state, std::size_t action, std::size_t next) const {
  if (state >= states() || action >= actions() || next >= states()) {
    throw std::out_of_range("tabular model: index out of range");
  }
  return counts_[(state * actions() + action) * states() + next];
}

double TabularModel::probability(std::size_t state, std::size_t action, std::size_t next) const {
  const std::uint64_t n = count(state, action);
  return n == 0 ? 0.0 : static_cast<double>(transitions(state, action, next)) / static_cast<double>(n);
}

TabularModel build_tabular_model(const ReplayBuffer& buffer, std::size_t states, std::size_t actions) {
  TabularModel model(states, actions);
  for (const auto& e : buffer.entries()) model.observe(e.episode);
  return model;
}

DpResult dp_expected_return(const TabularModel& model, std::size_t horizon,
                            const std::vector<std::vector<double>>& policy) {
  const std::size_t S = model.states();
  const std::size_t A = model.actions();
  if (policy.size() != S) throw std::invalid_argument("dp: policy needs one row per state");
  DpResult out;
  out.unmodeled.assign(S, false);
  // Renormalized policy over tried actions.
  std::vector<std::vector<double>> pi(S, std::vector<double>(A, 0.0));
  for (std::size_t s = 0; s < S; ++s) {
    if (policy[s].size() != A) throw std::invalid_argument("dp: policy row has wrong length");
    double mass = 0.0;
    bool tried = false;
    for (std::size_t a = 0; a < A; ++a) {
      if (policy[s][a] < 0.0) throw std::invalid_argument("dp: negative policy probability");
      if (model.count(s, a) > 0) {
        tried = true;
        pi[s][a] = policy[s][a];
        mass += policy[s][a];
      }
    }
    if (!tried) {
      out.unmodeled[s] = true;
      continue;
    }
    if (mass <= 0.0) {
      // Policy puts no mass on tried actions: fall back to uniform over them.
      std::size_t n = 0;
      for (std::size_t a = 0; a < A; ++a) n += model.count(s, a) > 0;
      for (std::size_t a = 0; a < A; ++a) pi[s][a] = model.count(s, a) > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    } else {
      for (auto& p : pi[s]) p /= mass;
    }
  }
  std::vector<double> v(S, 0.0), next(S, 0.0);
  for (std::size_t h = 1; h <= horizon; ++h) {
    for (std::size_t s = 0; s < S; ++s) {
      if (out.unmodeled[s]) {
        next[s] = 0.0;
        continue;
      }
      double val = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        if (pi[s][a] == 0.0) continue;
        double q = model.rewards().mean(s, a);
        for (std::size_t s2 = 0; s2 < S; ++s2) {
          const double p = model.probability(s, a, s2);
          if (p != 0.0) q += p * v[s2];
        }
        val += pi[s][a] * q;
      }
      next[s] = val;
    }
    std::swap(v, next);
  }
  out.values = std::move(v);
  return out;
}

}  // namespace udrl
