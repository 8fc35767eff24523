#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace udrl {

using Vec = std::vector<double>;

// Dimension constants of an environment interface: observation (m),
// reward (n) and action (o) vector lengths.
struct Dims {
  std::size_t obs = 0;
  std::size_t reward = 1;
  std::size_t action = 0;

  bool operator==(const Dims&) const = default;
};

// One interaction step t. `reward` is the reward caused by `action`, i.e.
// the quantity that arrives at t+1; storing it with step t keeps segment
// sums over transitions k..j inclusive.
struct Transition {
  Vec prev_action;  // out'(t-1); zeros at t = 1
  Vec observation;  // in(t)
  Vec reward;       // r(t+1)
  Vec action;       // out'(t)

  bool operator==(const Transition&) const = default;
};

class EpisodeRecorder;

// Immutable record of one trial. Steps are addressed 1-based in the
// relabeling API (t = 1..T) and 0-based through transitions().
class Episode {
 public:
  Episode() = default;
  Episode(std::string env_id, std::uint64_t seed, Dims dims, std::vector<Transition> transitions,
          Vec final_observation);

  std::size_t size() const { return transitions_.size(); }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Transition& step(std::size_t t) const;  // 1-based
  const Vec& final_observation() const { return final_observation_; }

  // Observation in(t) for t in 1..T+1; t = T+1 is the observation after the
  // last action.
  const Vec& observation(std::size_t t) const;
  // r(t) as fed alongside in(t): the reward caused by the action at t-1.
  Vec input_reward(std::size_t t) const;

  const Vec& total_reward() const { return total_reward_; }
  // Scalar return used for ranking: sum of the reward components.
  double return_value() const;

  const std::string& env_id() const { return env_id_; }
  std::uint64_t seed() const { return seed_; }
  const Dims& dims() const { return dims_; }

  bool operator==(const Episode&) const = default;

 private:
  std::string env_id_;
  std::uint64_t seed_ = 0;
  Dims dims_;
  std::vector<Transition> transitions_;
  Vec final_observation_;
  Vec total_reward_;
};

// Accumulates an episode while a trial runs.
class EpisodeRecorder {
 public:
  EpisodeRecorder(std::string env_id, std::uint64_t seed, Dims dims, Vec initial_observation);

  void record(const Vec& action, const Vec& reward, const Vec& next_observation);

  std::size_t size() const { return transitions_.size(); }
  const Vec& current_observation() const { return current_obs_; }
  const Vec& last_action() const { return last_action_; }
  const Vec& last_reward() const { return last_reward_; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  Episode finish() &&;

 private:
  std::string env_id_;
  std::uint64_t seed_;
  Dims dims_;
  std::vector<Transition> transitions_;
  Vec current_obs_;
  Vec last_action_;
  Vec last_reward_;
};

Vec add(std::span<const double> a, std::span<const double> b);
std::size_t argmax(std::span<const double> v);
Vec one_hot(std::size_t index, std::size_t size);

}  // namespace udrl
