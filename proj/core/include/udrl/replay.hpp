#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

#include "udrl/episode.hpp"
#include "udrl/relabel.hpp"
#include "udrl/rng.hpp"

namespace udrl {

enum class SelectionPolicy { all, top_k_by_return, recent_w };

std::string_view to_string(SelectionPolicy policy);
SelectionPolicy selection_from_string(std::string_view s);

struct StoredEpisode {
  std::uint64_t id = 0;
  Episode episode;
};

// Episode store. Over capacity, `top_k_by_return` evicts the lowest-return
// episode (oldest first among ties); `recent_w` and `all` evict the oldest.
// Not internally synchronized: one writer, and readers that do not overlap
// with writes (the parallel trainer hands episodes over through a queue).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1000, SelectionPolicy policy = SelectionPolicy::all);

  void add_episode(Episode episode);

  // Single-life mode: append `more` to the most recent episode (or store it
  // if the buffer is empty). Dims and env id must match.
  void extend_last(const Episode& more);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  SelectionPolicy policy() const { return policy_; }

  const std::deque<StoredEpisode>& entries() const { return entries_; }
  std::vector<Episode> episodes() const;
  // Stored episode with the given id, or nullptr if evicted.
  const Episode* find(std::uint64_t id) const;

  // Highest return ever added (including evicted episodes); -inf if none.
  double best_return() const { return best_return_; }
  // Length of the episode that set best_return (first one on ties).
  std::size_t best_length() const { return best_length_; }
  // Lowest return among stored episodes; +inf if empty.
  double min_stored_return() const;
  // Largest |return| among stored episodes.
  double max_abs_return() const;

  std::uint64_t total_added() const { return next_id_; }

  void save(const std::filesystem::path& path) const;
  static ReplayBuffer load(const std::filesystem::path& path, std::size_t capacity, SelectionPolicy policy);

 private:
  void evict();

  std::size_t capacity_;
  SelectionPolicy policy_;
  std::deque<StoredEpisode> entries_;
  std::uint64_t next_id_ = 0;
  double best_return_;
  std::size_t best_length_ = 0;
};

// All (k, j) with 1 <= k <= j <= T in lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t T);
constexpr std::size_t pair_count(std::size_t T) { return T * (T + 1) / 2; }

// Fractions of each relabeler in a batch: exact rewards, "more than"
// rewards, and goal-observation commands. Must sum to 1.
struct RelabelMix {
  double exact = 1.0;
  double morethan = 0.0;
  double goal = 0.0;
  std::vector<double> fractions{kMorethanFractions.begin(), kMorethanFractions.end()};

  void validate() const;
  bool operator==(const RelabelMix&) const = default;
};

struct SampleOptions {
  // Horizon-free variant: every segment runs to the end of its episode.
  bool episode_end_only = false;
};

struct RelabelCounts {
  std::array<std::uint64_t, 3> by_kind{};  // exact, morethan, goal
  std::uint64_t total() const { return by_kind[0] + by_kind[1] + by_kind[2]; }
};

// Episode uniform, then k uniform in 1..T, then j uniform in k..T, then a
// relabeler drawn from `mix`. Throws NoDataError on an empty buffer.
std::vector<SegmentSample> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, const RelabelMix& mix,
                                        const HorizonScheme& scheme, CounterRng& rng,
                                        const SampleOptions& options = {}, RelabelCounts* counts = nullptr);

// Exact relabeling of every pair of every stored episode.
std::vector<SegmentSample> enumerate_samples(const ReplayBuffer& buffer, const HorizonScheme& scheme);

}  // namespace udrl
