#include "udrl/episode.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace udrl {

namespace {

void check_len(const Vec& v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string("episode: ") + what + " has length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(n));
  }
}

}  // namespace

Episode::Episode(std::string env_id, std::uint64_t seed, Dims dims, std::vector<Transition> transitions,
                 Vec final_observation)
    : env_id_(std::move(env_id)),
      seed_(seed),
      dims_(dims),
      transitions_(std::move(transitions)),
      final_observation_(std::move(final_observation)),
      total_reward_(dims.reward, 0.0) {
  if (transitions_.empty()) {
    throw std::invalid_argument("episode: needs at least one transition");
  }
  check_len(final_observation_, dims_.obs, "final observation");
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    const auto& tr = transitions_[t];
    check_len(tr.prev_action, dims_.action, "prev_action");
    check_len(tr.observation, dims_.obs, "observation");
    check_len(tr.reward, dims_.reward, "reward");
    check_len(tr.action, dims_.action, "action");
    if (t > 0 && tr.prev_action != transitions_[t - 1].action) {
      throw std::invalid_argument("episode: prev_action does not match the previous step's action");
    }
    for (std::size_t i = 0; i < dims_.reward; ++i) total_reward_[i] += tr.reward[i];
  }
  if (std::any_of(transitions_.front().prev_action.begin(), transitions_.front().prev_action.end(),
                  [](double x) { return x != 0.0; })) {
    throw std::invalid_argument("episode: prev_action at t = 1 must be zero");
  }
}

const Transition& Episode::step(std::size_t t) const {
  if (t < 1 || t > transitions_.size()) {
    throw std::out_of_range("episode: step " + std::to_string(t) + " outside 1.." +
                            std::to_string(transitions_.size()));
  }
  return transitions_[t - 1];
}

const Vec& Episode::observation(std::size_t t) const {
  if (t == transitions_.size() + 1) return final_observation_;
  return step(t).observation;
}

Vec Episode::input_reward(std::size_t t) const {
  if (t == 1) return Vec(dims_.reward, 0.0);
  return step(t - 1).reward;
}

double Episode::return_value() const { return std::accumulate(total_reward_.begin(), total_reward_.end(), 0.0); }

EpisodeRecorder::EpisodeRecorder(std::string env_id, std::uint64_t seed, Dims dims, Vec initial_observation)
    : env_id_(std::move(env_id)),
      seed_(seed),
      dims_(dims),
      current_obs_(std::move(initial_observation)),
      last_action_(dims.action, 0.0),
      last_reward_(dims.reward, 0.0) {}

void EpisodeRecorder::record(const Vec& action, const Vec& reward, const Vec& next_observation) {
  transitions_.push_back(Transition{last_action_, current_obs_, reward, action});
  last_action_ = action;
  last_reward_ = reward;
  current_obs_ = next_observation;
}

Episode EpisodeRecorder::finish() && {
  return Episode(std::move(env_id_), seed_, dims_, std::move(transitions_), std::move(current_obs_));
}

Vec add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("add: length mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax: empty vector");
  // First maximal element: ties break toward the lowest index.
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

Vec one_hot(std::size_t index, std::size_t size) {
  if (index >= size) throw std::out_of_range("one_hot: index out of range");
  Vec v(size, 0.0);
  v[index] = 1.0;
  return v;
}

}  // namespace udrl
