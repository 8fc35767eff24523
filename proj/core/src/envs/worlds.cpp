#include "udrl/envs/worlds.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

#include "udrl/rng.hpp"

namespace udrl::envs {

GridMap GridMap::parse(const std::vector<std::string>& lines) {
  if (lines.empty()) throw std::invalid_argument("grid map: no rows");
  GridMap m;
  m.rows = lines.size();
  m.cols = lines.front().size();
  if (m.cols == 0) throw std::invalid_argument("grid map: empty row");
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].size() != m.cols) {
      throw std::invalid_argument("grid map: row " + std::to_string(r) + " has length " +
                                  std::to_string(lines[r].size()) + ", expected " + std::to_string(m.cols));
    }
    for (std::size_t c = 0; c < m.cols; ++c) {
      const char ch = lines[r][c];
      const std::size_t cell = r * m.cols + c;
      switch (ch) {
        case '.':
        case '#':
          break;
        case 'S':
        case 'A':
          m.starts.push_back(cell);
          break;
        case 'G':
        case 'B':
          m.goals.push_back(cell);
          break;
        default:
          throw std::invalid_argument(std::string("grid map: unknown cell character '") + ch + "'");
      }
      m.cells.push_back(ch);
    }
  }
  if (m.starts.empty()) throw std::invalid_argument("grid map: no start cell");
  return m;
}

bool GridMap::goal(std::size_t cell) const { return std::find(goals.begin(), goals.end(), cell) != goals.end(); }

std::size_t GridMap::move(std::size_t cell, std::size_t action) const {
  const std::size_t r = cell / cols;
  const std::size_t c = cell % cols;
  std::size_t nr = r;
  std::size_t nc = c;
  switch (action) {
    case 0: if (r > 0) nr = r - 1; break;
    case 1: if (r + 1 < rows) nr = r + 1; break;
    case 2: if (c > 0) nc = c - 1; break;
    case 3: if (c + 1 < cols) nc = c + 1; break;
    default: throw std::out_of_range("grid map: action index out of range");
  }
  const std::size_t next = nr * cols + nc;
  return wall(next) ? cell : next;
}

GridWorld::GridWorld(std::string name, GridMap map, GridParams params)
    : map_(std::move(map)), params_(params) {
  if (map_.goals.empty()) throw std::invalid_argument("grid world: map needs a goal cell");
  spec_.name = std::move(name);
  spec_.dims = Dims{map_.size(), 1, kGridActions};
  spec_.action_kind = ActionKind::discrete;
  spec_.max_steps = params_.max_steps;
  spec_.markovian = true;
  spec_.num_states = map_.size();
  spec_.validate();
}

GridWorld GridWorld::default_grid() {
  return GridWorld("grid_world", GridMap::parse({"S....", ".##..", ".....", "..#..", "....G"}), GridParams{});
}

GridWorld GridWorld::default_fork() {
  return GridWorld("fork_world", GridMap::parse({"#...#", "A.#.B", "#...#"}), GridParams{});
}

GridWorld GridWorld::multi_start() {
  return GridWorld("multi_start_grid", GridMap::parse({"S...S", ".....", "..G..", ".....", "S...S"}), GridParams{});
}

Vec GridWorld::do_reset(std::uint64_t seed) {
  cell_ = map_.starts[seed % map_.starts.size()];
  return one_hot(cell_, map_.size());
}

StepResult GridWorld::do_step(const Vec& action, std::size_t) {
  const std::size_t a = discrete_action_index(action, kGridActions);
  cell_ = map_.move(cell_, a);
  StepResult r;
  r.observation = one_hot(cell_, map_.size());
  const bool at_goal = map_.goal(cell_);
  r.reward = Vec{at_goal ? params_.goal_reward : params_.step_reward};
  r.done = at_goal;
  return r;
}

std::vector<std::size_t> GridWorld::shortest_path(std::size_t start) const {
  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  // Distance-to-goal by BFS over reversed moves.
  std::vector<std::size_t> dist(map_.size(), kInf);
  std::deque<std::size_t> queue;
  for (auto g : map_.goals) {
    dist[g] = 0;
    queue.push_back(g);
  }
  while (!queue.empty()) {
    const auto cell = queue.front();
    queue.pop_front();
    for (std::size_t prev = 0; prev < map_.size(); ++prev) {
      if (map_.wall(prev) || dist[prev] != kInf) continue;
      for (std::size_t a = 0; a < kGridActions; ++a) {
        if (map_.move(prev, a) == cell && prev != cell) {
          dist[prev] = dist[cell] + 1;
          queue.push_back(prev);
          break;
        }
      }
    }
  }
  if (dist[start] == kInf) throw std::invalid_argument("grid world: goal unreachable from start");
  std::vector<std::size_t> path;
  std::size_t cell = start;
  while (dist[cell] != 0) {
    for (std::size_t a = 0; a < kGridActions; ++a) {
      const auto next = map_.move(cell, a);
      if (dist[next] + 1 == dist[cell]) {
        path.push_back(a);
        cell = next;
        break;
      }
    }
  }
  return path;
}

ObstacleLine::ObstacleLine(double high_reward, double margin) : high_reward_(high_reward), margin_(margin) {
  if (!(margin >= 0.0 && margin < 0.5)) throw std::invalid_argument("obstacle_line: margin must lie in [0, 0.5)");
  spec_.name = "obstacle_line";
  spec_.dims = Dims{1, 1, 1};
  spec_.action_kind = ActionKind::continuous;
  spec_.max_steps = 1;
  spec_.markovian = true;
}

double ObstacleLine::reward_for(double a) const {
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("obstacle_line: action must lie in [0, 1]");
  return std::min(a, 1.0 - a) <= margin_ ? high_reward_ : 0.0;
}

Vec ObstacleLine::do_reset(std::uint64_t) { return Vec{1.0}; }

StepResult ObstacleLine::do_step(const Vec& action, std::size_t) {
  return StepResult{Vec{1.0}, Vec{reward_for(action[0])}, true};
}

TMaze::TMaze(std::size_t corridor_length, double success_reward, double failure_reward, std::size_t max_steps)
    : length_(corridor_length), success_(success_reward), failure_(failure_reward) {
  if (corridor_length == 0) throw std::invalid_argument("tmaze: corridor length must be at least 1");
  spec_.name = "tmaze";
  spec_.dims = Dims{4, 1, 2};
  spec_.action_kind = ActionKind::discrete;
  spec_.max_steps = max_steps;
  spec_.markovian = false;
  spec_.validate();
}

bool TMaze::goal_is_up(std::uint64_t seed) { return counter_uniform(seed, 0, 0x7a11) < 0.5; }

Vec TMaze::observe() const {
  if (pos_ == 0) return Vec{goal_up_ ? 1.0 : 0.0, goal_up_ ? 0.0 : 1.0, 1.0, 0.0};
  if (pos_ < length_) return Vec{0.0, 0.0, 1.0, 0.0};
  return Vec{0.0, 0.0, 0.0, 1.0};
}

Vec TMaze::do_reset(std::uint64_t seed) {
  goal_up_ = goal_is_up(seed);
  pos_ = 0;
  return observe();
}

StepResult TMaze::do_step(const Vec& action, std::size_t) {
  const std::size_t a = discrete_action_index(action, 2);
  if (pos_ < length_) {
    ++pos_;
    return StepResult{observe(), Vec{0.0}, false};
  }
  const bool success = (a == 0) == goal_up_;
  return StepResult{Vec{0.0, 0.0, 0.0, 0.0}, Vec{success ? success_ : failure_}, true};
}

StochasticGrid::StochasticGrid(GridMap map, TwoPointReward default_reward, std::size_t max_steps)
    : map_(std::move(map)), dists_(map_.size() * kGridActions, default_reward) {
  spec_.name = "stochastic_grid";
  spec_.dims = Dims{map_.size(), 1, kGridActions};
  spec_.action_kind = ActionKind::discrete;
  spec_.max_steps = max_steps;
  spec_.markovian = true;
  spec_.num_states = map_.size();
  spec_.validate();
}

StochasticGrid StochasticGrid::default_world() {
  return StochasticGrid(GridMap::parse({"S..", "...", "..."}), TwoPointReward{}, 50);
}

void StochasticGrid::set_distribution(std::size_t cell, std::size_t action, TwoPointReward dist) {
  if (cell >= map_.size() || action >= kGridActions) throw std::out_of_range("stochastic_grid: index out of range");
  if (!(dist.p_high >= 0.0 && dist.p_high <= 1.0)) throw std::invalid_argument("stochastic_grid: p_high outside [0, 1]");
  dists_[cell * kGridActions + action] = dist;
}

const TwoPointReward& StochasticGrid::distribution(std::size_t cell, std::size_t action) const {
  if (cell >= map_.size() || action >= kGridActions) throw std::out_of_range("stochastic_grid: index out of range");
  return dists_[cell * kGridActions + action];
}

Vec StochasticGrid::do_reset(std::uint64_t seed) {
  cell_ = map_.starts[seed % map_.starts.size()];
  return one_hot(cell_, map_.size());
}

StepResult StochasticGrid::do_step(const Vec& action, std::size_t t) {
  const std::size_t a = discrete_action_index(action, kGridActions);
  const auto& d = distribution(cell_, a);
  const double u = counter_uniform(seed(), t, 0x5eed);
  const double reward = u < d.p_high ? d.high : d.low;
  cell_ = map_.move(cell_, a);
  return StepResult{one_hot(cell_, map_.size()), Vec{reward}, false};
}

TwinBits::TwinBits(std::size_t bits) {
  if (bits == 0) throw std::invalid_argument("twin_bits: need at least one bit");
  spec_.name = "twin_bits";
  spec_.dims = Dims{1, 1, bits};
  spec_.action_kind = ActionKind::multi_binary;
  spec_.max_steps = 1;
  spec_.markovian = true;
}

Vec TwinBits::do_reset(std::uint64_t) { return Vec{1.0}; }

StepResult TwinBits::do_step(const Vec& action, std::size_t) {
  const bool equal = std::all_of(action.begin(), action.end(), [&](double b) { return b == action.front(); });
  return StepResult{Vec{1.0}, Vec{equal ? 1.0 : 0.0}, true};
}

NullWorld::NullWorld() {
  spec_.name = "null_world";
  spec_.dims = Dims{1, 1, 1};
  spec_.action_kind = ActionKind::discrete;
  spec_.max_steps = 1;
  spec_.markovian = true;
  spec_.num_states = 1;
}

Vec NullWorld::do_reset(std::uint64_t) { return Vec{1.0}; }

StepResult NullWorld::do_step(const Vec&, std::size_t) { return StepResult{Vec{1.0}, Vec{0.0}, true}; }

}  // namespace udrl::envs
