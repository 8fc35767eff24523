#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "udrl/command.hpp"
#include "udrl/episode.hpp"

namespace udrl {

enum class RelabelKind { exact, morethan, goal, expected };

// A hindsight-relabeled training example for segment (k, j) of an episode:
// "acting as at step k achieved `command` within j - k further steps".
struct SegmentSample {
  std::uint64_t episode_ref = 0;
  std::size_t k = 1;
  std::size_t j = 1;
  Command command;
  Vec target_action;
  std::size_t history_prefix_len = 0;
  RelabelKind kind = RelabelKind::exact;
};

inline constexpr std::array<double, 3> kMorethanFractions = {0.5, 0.75, 0.875};

// Componentwise sum of rewards over transitions k..j inclusive.
Vec segment_reward(const Episode& episode, std::size_t k, std::size_t j);

// Lower bound demanded by a "more than" command: fraction * sum for
// positive components, sum - (1 - fraction) * |sum| in general, so the
// bound never exceeds what the segment achieved.
Vec morethan_desire(std::span<const double> achieved, double fraction);

SegmentSample relabel_segment(const Episode& episode, std::size_t k, std::size_t j,
                              const HorizonScheme& scheme, std::uint64_t episode_ref = 0);

SegmentSample relabel_morethan(const Episode& episode, std::size_t k, std::size_t j, double fraction,
                               const HorizonScheme& scheme, std::uint64_t episode_ref = 0);

// goal_obs is the observation that followed the segment, in(j+1).
SegmentSample relabel_goal(const Episode& episode, std::size_t k, std::size_t j,
                           const HorizonScheme& scheme, std::uint64_t episode_ref = 0);

}  // namespace udrl
