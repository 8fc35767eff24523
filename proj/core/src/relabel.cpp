#include "udrl/relabel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace udrl {

namespace {

void check_segment(const Episode& episode, std::size_t k, std::size_t j) {
  if (k < 1 || k > j || j > episode.size()) {
    throw std::out_of_range("segment (" + std::to_string(k) + ", " + std::to_string(j) +
                            ") invalid for episode of length " + std::to_string(episode.size()));
  }
}

}  // namespace

Vec segment_reward(const Episode& episode, std::size_t k, std::size_t j) {
  check_segment(episode, k, j);
  Vec sum(episode.dims().reward, 0.0);
  for (std::size_t t = k; t <= j; ++t) {
    const auto& r = episode.step(t).reward;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += r[i];
  }
  return sum;
}

Vec morethan_desire(std::span<const double> achieved, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("morethan fraction must lie in (0, 1)");
  Vec out(achieved.size());
  for (std::size_t i = 0; i < achieved.size(); ++i) {
    out[i] = achieved[i] - (1.0 - fraction) * std::abs(achieved[i]);
  }
  return out;
}

SegmentSample relabel_segment(const Episode& episode, std::size_t k, std::size_t j, const HorizonScheme& scheme,
                              std::uint64_t episode_ref) {
  check_segment(episode, k, j);
  SegmentSample s;
  s.episode_ref = episode_ref;
  s.k = k;
  s.j = j;
  s.command = make_command(j - k, segment_reward(episode, k, j), scheme);
  s.target_action = episode.step(k).action;
  s.history_prefix_len = k - 1;
  s.kind = RelabelKind::exact;
  return s;
}

SegmentSample relabel_morethan(const Episode& episode, std::size_t k, std::size_t j, double fraction,
                               const HorizonScheme& scheme, std::uint64_t episode_ref) {
  SegmentSample s = relabel_segment(episode, k, j, scheme, episode_ref);
  s.command.desire = morethan_desire(s.command.desire, fraction);
  s.command.morethan = true;
  s.kind = RelabelKind::morethan;
  return s;
}

SegmentSample relabel_goal(const Episode& episode, std::size_t k, std::size_t j, const HorizonScheme& scheme,
                           std::uint64_t episode_ref) {
  SegmentSample s = relabel_segment(episode, k, j, scheme, episode_ref);
  s.command.goal_obs = episode.observation(j + 1);
  s.kind = RelabelKind::goal;
  return s;
}

}  // namespace udrl
