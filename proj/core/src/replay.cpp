#include "udrl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "udrl/episode_io.hpp"
#include "udrl/errors.hpp"

namespace udrl {

std::string_view to_string(SelectionPolicy policy) {
  switch (policy) {
    case SelectionPolicy::all: return "all";
    case SelectionPolicy::top_k_by_return: return "top_k_by_return";
    case SelectionPolicy::recent_w: return "recent_w";
  }
  return "all";
}

SelectionPolicy selection_from_string(std::string_view s) {
  if (s == "all") return SelectionPolicy::all;
  if (s == "top_k_by_return") return SelectionPolicy::top_k_by_return;
  if (s == "recent_w") return SelectionPolicy::recent_w;
  throw std::invalid_argument("unknown selection policy '" + std::string(s) + "'");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, SelectionPolicy policy)
    : capacity_(capacity), policy_(policy), best_return_(-std::numeric_limits<double>::infinity()) {
  if (capacity == 0) throw std::invalid_argument("replay buffer: capacity must be positive");
}

void ReplayBuffer::add_episode(Episode episode) {
  const double ret = episode.return_value();
  if (ret > best_return_) {
    best_return_ = ret;
    best_length_ = episode.size();
  }
  entries_.push_back(StoredEpisode{next_id_++, std::move(episode)});
  while (entries_.size() > capacity_) evict();
}

void ReplayBuffer::extend_last(const Episode& more) {
  if (entries_.empty()) {
    add_episode(more);
    return;
  }
  const Episode& last = entries_.back().episode;
  if (last.dims() != more.dims() || last.env_id() != more.env_id()) {
    throw std::invalid_argument("replay buffer: cannot extend an episode with a different environment");
  }
  std::vector<Transition> transitions = last.transitions();
  Vec prev = transitions.back().action;
  for (auto tr : more.transitions()) {
    tr.prev_action = prev;
    prev = tr.action;
    transitions.push_back(std::move(tr));
  }
  Episode merged(last.env_id(), last.seed(), last.dims(), std::move(transitions), more.final_observation());
  if (merged.return_value() > best_return_) {
    best_return_ = merged.return_value();
    best_length_ = merged.size();
  }
  entries_.back().episode = std::move(merged);
}

void ReplayBuffer::evict() {
  if (policy_ == SelectionPolicy::top_k_by_return) {
    auto worst = entries_.begin();
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (it->episode.return_value() < worst->episode.return_value()) worst = it;
    }
    entries_.erase(worst);
  } else {
    entries_.pop_front();
  }
}

std::vector<Episode> ReplayBuffer::episodes() const {
  std::vector<Episode> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.episode);
  return out;
}

const Episode* ReplayBuffer::find(std::uint64_t id) const {
  // Ids increase along the deque; eviction never reorders.
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                                   [](const StoredEpisode& e, std::uint64_t v) { return e.id < v; });
  return it != entries_.end() && it->id == id ? &it->episode : nullptr;
}

double ReplayBuffer::min_stored_return() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries_) m = std::min(m, e.episode.return_value());
  return m;
}

double ReplayBuffer::max_abs_return() const {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, std::abs(e.episode.return_value()));
  return m;
}

void ReplayBuffer::save(const std::filesystem::path& path) const {
  const auto eps = episodes();
  save_episodes(path, eps);
}

ReplayBuffer ReplayBuffer::load(const std::filesystem::path& path, std::size_t capacity, SelectionPolicy policy) {
  ReplayBuffer buffer(capacity, policy);
  for (auto& e : load_episodes(path)) buffer.add_episode(std::move(e));
  return buffer;
}

std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t T) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(pair_count(T));
  for (std::size_t k = 1; k <= T; ++k) {
    for (std::size_t j = k; j <= T; ++j) pairs.emplace_back(k, j);
  }
  return pairs;
}

void RelabelMix::validate() const {
  if (exact < 0.0 || morethan < 0.0 || goal < 0.0) throw std::invalid_argument("relabel mix: negative fraction");
  if (std::abs(exact + morethan + goal - 1.0) > 1e-9) throw std::invalid_argument("relabel mix: fractions must sum to 1");
  if (morethan > 0.0) {
    if (fractions.empty()) throw std::invalid_argument("relabel mix: morethan needs at least one fraction");
    for (double f : fractions) {
      if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("relabel mix: morethan fractions must lie in (0, 1)");
    }
  }
}

std::vector<SegmentSample> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, const RelabelMix& mix,
                                        const HorizonScheme& scheme, CounterRng& rng, const SampleOptions& options,
                                        RelabelCounts* counts) {
  if (buffer.empty()) throw NoDataError("replay buffer holds no episodes");
  mix.validate();
  std::vector<SegmentSample> batch;
  batch.reserve(batch_size);
  const auto& entries = buffer.entries();
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto& stored = entries[rng.uniform_index(entries.size())];
    const Episode& ep = stored.episode;
    const std::size_t T = ep.size();
    const std::size_t k = 1 + rng.uniform_index(T);
    const std::size_t j = options.episode_end_only ? T : k + rng.uniform_index(T - k + 1);
    const double u = rng.uniform();
    if (u < mix.exact) {
      batch.push_back(relabel_segment(ep, k, j, scheme, stored.id));
      if (counts) ++counts->by_kind[0];
    } else if (u < mix.exact + mix.morethan) {
      const double f = mix.fractions[rng.uniform_index(mix.fractions.size())];
      batch.push_back(relabel_morethan(ep, k, j, f, scheme, stored.id));
      if (counts) ++counts->by_kind[1];
    } else {
      batch.push_back(relabel_goal(ep, k, j, scheme, stored.id));
      if (counts) ++counts->by_kind[2];
    }
  }
  return batch;
}

std::vector<SegmentSample> enumerate_samples(const ReplayBuffer& buffer, const HorizonScheme& scheme) {
  std::vector<SegmentSample> out;
  for (const auto& stored : buffer.entries()) {
    for (const auto& [k, j] : enumerate_pairs(stored.episode.size())) {
      out.push_back(relabel_segment(stored.episode, k, j, scheme, stored.id));
    }
  }
  return out;
}

}  // namespace udrl
