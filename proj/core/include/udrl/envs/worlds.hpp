#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "udrl/envs/env.hpp"

namespace udrl::envs {

// Rectangular cell map. Characters: '.' free, '#' wall, 'S'/'A' start,
// 'G'/'B' goal. Cells are indexed row-major (row * cols + col).
struct GridMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<char> cells;
  std::vector<std::size_t> starts;
  std::vector<std::size_t> goals;

  static GridMap parse(const std::vector<std::string>& lines);

  bool wall(std::size_t cell) const { return cells[cell] == '#'; }
  bool goal(std::size_t cell) const;
  std::size_t size() const { return rows * cols; }
  // Cell reached by moving (0 up, 1 down, 2 left, 3 right); walls and the
  // border leave the agent in place.
  std::size_t move(std::size_t cell, std::size_t action) const;
};

inline constexpr std::size_t kGridActions = 4;

struct GridParams {
  double step_reward = -0.1;
  double goal_reward = 10.0;
  std::size_t max_steps = 50;
};

// Deterministic Markovian grid. Observation: one-hot cell (m = rows * cols).
// Reward: goal_reward on entering a goal cell (episode ends), step_reward
// otherwise. reset(seed) starts in starts[seed % starts.size()].
class GridWorld : public Environment {
 public:
  GridWorld(std::string name, GridMap map, GridParams params);

  static GridWorld default_grid();  // 5x5 "grid_world"
  static GridWorld default_fork();  // "fork_world": two equal routes from A around an obstacle to B
  static GridWorld multi_start();   // 5x5 with four start cells

  const EnvSpec& spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<GridWorld>(*this); }
  std::optional<std::size_t> state_index() const override { return cell_; }

  const GridMap& map() const { return map_; }
  const GridParams& params() const { return params_; }
  std::size_t cell() const { return cell_; }

  // Shortest action sequence from `start` to the nearest goal (BFS, ties
  // broken by action order up, down, left, right).
  std::vector<std::size_t> shortest_path(std::size_t start) const;

 protected:
  Vec do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vec& action, std::size_t t) override;

 private:
  EnvSpec spec_;
  GridMap map_;
  GridParams params_;
  std::size_t cell_ = 0;
};

// Single-step continuous-action world: pass an obstacle to the left
// (a near 0) or right (a near 1). Observation is the constant [1.0].
// Reward high_reward when min(a, 1 - a) <= margin, else 0. Actions must lie
// in [0, 1].
class ObstacleLine : public Environment {
 public:
  explicit ObstacleLine(double high_reward = 10.0, double margin = 0.1);

  const EnvSpec& spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<ObstacleLine>(*this); }

  double reward_for(double action) const;

 protected:
  Vec do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vec& action, std::size_t t) override;

 private:
  EnvSpec spec_;
  double high_reward_;
  double margin_;
};

// Non-Markovian T-maze. Positions 0..L; the agent advances one position per
// step along the corridor whatever it does, and at the junction (position L)
// action 0 enters the upper arm, action 1 the lower arm, ending the episode.
// Observation [cue_up, cue_down, corridor, junction]: the cue bits are set
// only at position 0. Reward success_reward for the arm matching the cue,
// failure_reward otherwise, 0 on corridor steps. Goal side is a
// counter-based coin flip of the seed.
class TMaze : public Environment {
 public:
  explicit TMaze(std::size_t corridor_length = 4, double success_reward = 1.0, double failure_reward = 0.0,
                 std::size_t max_steps = 20);

  const EnvSpec& spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<TMaze>(*this); }

  static bool goal_is_up(std::uint64_t seed);

  std::size_t corridor_length() const { return length_; }
  bool goal_up() const { return goal_up_; }
  std::size_t position() const { return pos_; }
  double success_reward() const { return success_; }

 protected:
  Vec do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vec& action, std::size_t t) override;

 private:
  Vec observe() const;

  EnvSpec spec_;
  std::size_t length_;
  double success_;
  double failure_;
  bool goal_up_ = true;
  std::size_t pos_ = 0;
};

struct TwoPointReward {
  double low = 0.0;
  double high = 2.0;
  double p_high = 0.5;

  double mean() const { return low + p_high * (high - low); }
};

// Markovian grid with random immediate rewards: taking action a in cell s
// pays `high` with probability p_high and `low` otherwise. The draw at step t
// is a pure function of (seed, t), so episodes replay bit-identically.
// No terminal cells; episodes last max_steps.
class StochasticGrid : public Environment {
 public:
  StochasticGrid(GridMap map, TwoPointReward default_reward, std::size_t max_steps = 50);

  static StochasticGrid default_world();  // 3x3 open grid

  const EnvSpec& spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<StochasticGrid>(*this); }
  std::optional<std::size_t> state_index() const override { return cell_; }

  void set_distribution(std::size_t cell, std::size_t action, TwoPointReward dist);
  const TwoPointReward& distribution(std::size_t cell, std::size_t action) const;
  double true_mean(std::size_t cell, std::size_t action) const { return distribution(cell, action).mean(); }
  const GridMap& map() const { return map_; }

 protected:
  Vec do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vec& action, std::size_t t) override;

 private:
  EnvSpec spec_;
  GridMap map_;
  std::vector<TwoPointReward> dists_;  // cell * 4 + action
  std::size_t cell_ = 0;
};

// Single-step multi-binary world: o bits, observation [1.0], reward 1 when
// all bits are equal and 0 otherwise.
class TwinBits : public Environment {
 public:
  explicit TwinBits(std::size_t bits = 2);

  const EnvSpec& spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<TwinBits>(*this); }

 protected:
  Vec do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vec& action, std::size_t t) override;

 private:
  EnvSpec spec_;
};

// Single-step world with one action and zero reward.
class NullWorld : public Environment {
 public:
  NullWorld();

  const EnvSpec& spec() const override { return spec_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<NullWorld>(*this); }

 protected:
  Vec do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vec& action, std::size_t t) override;

 private:
  EnvSpec spec_;
};

}  // namespace udrl::envs
