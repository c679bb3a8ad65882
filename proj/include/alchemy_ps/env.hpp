#pragma once

// Simplified symbolic Alchemy: one stone, six single-use potions, a cauldron.
// An episode is 20 trials of 10 steps over a fixed ground-truth cube.

#include "alchemy_ps/cube.hpp"
#include "alchemy_ps/random.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace alchemy_ps {

inline constexpr int kTrialsPerEpisode = 20;
inline constexpr int kStepsPerTrial = 10;
inline constexpr int kStepsPerEpisode = kTrialsPerEpisode * kStepsPerTrial;
inline constexpr int kNumPotions = 6;
inline constexpr int kNumEnvActions = 8;
inline constexpr int kStateWidth = 14;
inline constexpr int kRowWidth = kNumEnvActions + kStateWidth;

/// Deposit reward as a function of the stone's Hamming distance to the goal.
inline constexpr std::array<int, 4> kRewardByDistance{15, 1, -1, -3};

constexpr int deposit_reward(VertexId stone, VertexId goal) {
  return kRewardByDistance[hamming_distance(stone, goal)];
}

constexpr int potion_slot(int axis, Direction dir) {
  return 2 * axis + (dir == Direction::Up ? 1 : 0);
}

/// Environment action, numbered 1..8: 1 no-op, 2 deposit, 3..8 potions in
/// slot order (3 + 2*axis + (dir == Up)).
struct EnvAction {
  std::uint8_t number = 1;

  constexpr EnvAction() = default;
  constexpr explicit EnvAction(int n) : number(static_cast<std::uint8_t>(n)) {
    if (n < 1 || n > kNumEnvActions) throw std::out_of_range("env action must be in 1..8");
  }

  static constexpr EnvAction noop() { return EnvAction(1); }
  static constexpr EnvAction deposit() { return EnvAction(2); }
  static constexpr EnvAction potion(int axis, Direction dir) {
    return EnvAction(3 + potion_slot(axis, dir));
  }

  constexpr bool is_noop() const { return number == 1; }
  constexpr bool is_deposit() const { return number == 2; }
  constexpr bool is_potion() const { return number >= 3; }
  constexpr int slot() const { return number - 3; }
  constexpr int axis() const { return slot() / 2; }
  constexpr Direction direction() const { return (slot() & 1) ? Direction::Up : Direction::Down; }

  friend constexpr auto operator<=>(EnvAction, EnvAction) = default;
};

constexpr EnvAction partial_to_env_action(PartialAction x) { return EnvAction(x.code() + 1); }
constexpr PartialAction env_to_partial_action(EnvAction a) {
  return PartialAction::from_code(a.number - 1);
}

struct Task {
  Cube cube;
  VertexId goal;

  Task() = default;
  explicit Task(Cube c) : cube(std::move(c)) {
    auto g = cube.goal_vertex();
    if (!g) throw std::invalid_argument("task cube must reward exactly one vertex");
    goal = *g;
  }
};

struct EnvState {
  VertexId stone;
  bool in_cauldron = false;
  std::bitset<kNumPotions> potions_empty;
  int brightness = 0;  // 3 - distance(stone, goal)
  int trial = 0;
  int step_in_trial = 0;
  bool finished = false;
  /// Starting stone of every trial, fixed at reset.
  std::array<VertexId, kTrialsPerEpisode> trial_starts{};

  bool operator==(const EnvState&) const = default;
};

class EpisodeFinished : public std::logic_error {
 public:
  EpisodeFinished() : std::logic_error("step called on a finished episode") {}
};

inline int brightness_of(VertexId stone, VertexId goal) { return 3 - hamming_distance(stone, goal); }

inline EnvState reset_episode(const Task& task, std::uint64_t seed) {
  Rng rng(seed);
  EnvState s;
  for (auto& v : s.trial_starts) v = VertexId(static_cast<int>(uniform_below(rng, kNumVertices)));
  s.stone = s.trial_starts[0];
  s.brightness = brightness_of(s.stone, task.goal);
  return s;
}

struct StepResult {
  EnvState state;
  int reward = 0;
};

inline StepResult step(const Task& task, const EnvState& state, EnvAction action) {
  if (state.finished) throw EpisodeFinished();
  StepResult out{state, 0};
  EnvState& s = out.state;

  if (!s.in_cauldron) {
    if (action.is_deposit()) {
      out.reward = deposit_reward(s.stone, task.goal);
      s.in_cauldron = true;
    } else if (action.is_potion() && !s.potions_empty.test(action.slot())) {
      s.potions_empty.set(action.slot());
      s.stone = apply_traversal(s.stone, action.axis(), action.direction(), task.cube);
      s.brightness = brightness_of(s.stone, task.goal);
    }
  }

  if (++s.step_in_trial == kStepsPerTrial) {
    if (s.trial + 1 == kTrialsPerEpisode) {
      s.finished = true;
    } else {
      ++s.trial;
      s.step_in_trial = 0;
      s.stone = s.trial_starts[s.trial];
      s.brightness = brightness_of(s.stone, task.goal);
      s.potions_empty.reset();
      s.in_cauldron = false;
    }
  }
  return out;
}

using StateRow = std::array<std::uint8_t, kStateWidth>;

/// [color, size, shape, in_cauldron, 6 potion-empty flags, brightness one-hot].
inline StateRow encode_state(const EnvState& s) {
  StateRow row{};
  row[0] = static_cast<std::uint8_t>(s.stone.color());
  row[1] = static_cast<std::uint8_t>(s.stone.size());
  row[2] = static_cast<std::uint8_t>(s.stone.shape());
  row[3] = s.in_cauldron ? 1 : 0;
  for (int i = 0; i < kNumPotions; ++i) row[4 + i] = s.potions_empty.test(i) ? 1 : 0;
  row[10 + s.brightness] = 1;
  return row;
}

/// Best deposit reward reachable within one trial from `start` with all
/// potions full, by exhaustive dynamic programming over (vertex, potion
/// mask, steps left). Never depositing scores 0.
inline int optimal_trial_reward(const Cube& cube, VertexId start, int horizon = kStepsPerTrial) {
  const auto goal = cube.goal_vertex();
  if (!goal) throw std::invalid_argument("cube must reward exactly one vertex");

  // best[v][mask] for the current number of steps left; 0 steps left -> 0.
  std::array<std::array<int, 1 << kNumPotions>, kNumVertices> best{};
  for (int left = 1; left <= horizon; ++left) {
    auto next = best;
    for (int v = 0; v < kNumVertices; ++v) {
      for (int mask = 0; mask < (1 << kNumPotions); ++mask) {
        int value = std::max(best[v][mask], deposit_reward(VertexId(v), *goal));
        for (int slot = 0; slot < kNumPotions; ++slot) {
          if (mask & (1 << slot)) continue;
          const int axis = slot / 2;
          const Direction dir = (slot & 1) ? Direction::Up : Direction::Down;
          VertexId to = apply_traversal(VertexId(v), axis, dir, cube.edges);
          value = std::max(value, best[to.index][mask | (1 << slot)]);
        }
        next[v][mask] = value;
      }
    }
    best = next;
  }
  return best[start.index][0];
}

}  // namespace alchemy_ps
