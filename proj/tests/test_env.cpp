#include "alchemy_ps/env.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace alchemy_ps;

namespace {

Task full_task(int goal = 7) { return Task(Cube(EdgeSet().set(), VertexId(goal))); }

EnvState at_stone(const Task& task, VertexId stone) {
  EnvState s = reset_episode(task, 0);
  s.stone = stone;
  s.trial_starts[0] = stone;
  s.brightness = brightness_of(stone, task.goal);
  return s;
}

}  // namespace

TEST(Reset, DeterministicAndFresh) {
  Task task = full_task();
  EXPECT_EQ(reset_episode(task, 42), reset_episode(task, 42));
  EnvState s = reset_episode(task, 42);
  EXPECT_EQ(s.potions_empty.to_ulong(), 0u);
  EXPECT_FALSE(s.in_cauldron);
  EXPECT_EQ(s.trial, 0);
  EXPECT_EQ(s.step_in_trial, 0);
  EXPECT_EQ(s.stone, s.trial_starts[0]);
  EXPECT_EQ(s.brightness, 3 - hamming_distance(s.stone, task.goal));
}

TEST(Reset, StartingStoneIsUniform) {
  Task task = full_task();
  std::array<int, 8> counts{};
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) ++counts[reset_episode(task, seed).stone.index];
  for (int v = 0; v < 8; ++v) EXPECT_NEAR(counts[v] / double(n), 0.125, 0.01) << "vertex " << v;
}

TEST(Step, PotionTransformsAndEmpties) {
  Task task = full_task();
  EnvState s = at_stone(task, VertexId(0));
  auto r = step(task, s, EnvAction::potion(2, Direction::Up));
  EXPECT_EQ(r.state.stone, vertex_index(0, 0, 1));
  EXPECT_TRUE(r.state.potions_empty.test(potion_slot(2, Direction::Up)));
  EXPECT_EQ(r.state.potions_empty.count(), 1u);
  EXPECT_EQ(r.reward, 0);
  EXPECT_EQ(r.state.brightness, 1);
}

TEST(Step, PotionConsumedEvenWhenEdgeMissing) {
  Task task(Cube(EdgeSet(), VertexId(7)));
  EnvState s = at_stone(task, VertexId(0));
  auto r = step(task, s, EnvAction::potion(0, Direction::Up));
  EXPECT_EQ(r.state.stone, VertexId(0));
  EXPECT_TRUE(r.state.potions_empty.test(potion_slot(0, Direction::Up)));
}

TEST(Step, EmptyPotionHasNoEffect) {
  Task task = full_task();
  EnvState s = at_stone(task, VertexId(0));
  s = step(task, s, EnvAction::potion(2, Direction::Up)).state;
  s = step(task, s, EnvAction::potion(2, Direction::Down)).state;
  EXPECT_EQ(s.stone, VertexId(0));
  auto r = step(task, s, EnvAction::potion(2, Direction::Up));
  EXPECT_EQ(r.state.stone, VertexId(0));
  EXPECT_EQ(r.reward, 0);
}

TEST(Step, DepositRewardsByDistance) {
  Task task = full_task();
  EXPECT_EQ(step(task, at_stone(task, VertexId(7)), EnvAction::deposit()).reward, 15);
  EXPECT_EQ(step(task, at_stone(task, VertexId(3)), EnvAction::deposit()).reward, 1);
  EXPECT_EQ(step(task, at_stone(task, VertexId(1)), EnvAction::deposit()).reward, -1);
  auto r = step(task, at_stone(task, VertexId(0)), EnvAction::deposit());
  EXPECT_EQ(r.reward, -3);
  EXPECT_TRUE(r.state.in_cauldron);
}

TEST(Step, ActionsInCauldronAreNoops) {
  Task task = full_task();
  EnvState s = step(task, at_stone(task, VertexId(0)), EnvAction::deposit()).state;
  auto again = step(task, s, EnvAction::deposit());
  EXPECT_EQ(again.reward, 0);
  auto potion = step(task, s, EnvAction::potion(0, Direction::Up));
  EXPECT_EQ(potion.state.stone, s.stone);
  EXPECT_EQ(potion.state.potions_empty, s.potions_empty);
  EXPECT_TRUE(potion.state.in_cauldron);
}

TEST(Step, TrialRolloverAndEpisodeEnd) {
  Task task = full_task();
  EnvState s = reset_episode(task, 3);
  s = step(task, s, EnvAction::potion(0, Direction::Up)).state;
  s = step(task, s, EnvAction::deposit()).state;
  for (int i = 2; i < 10; ++i) s = step(task, s, EnvAction::noop()).state;
  EXPECT_EQ(s.trial, 1);
  EXPECT_EQ(s.step_in_trial, 0);
  EXPECT_EQ(s.stone, s.trial_starts[1]);
  EXPECT_FALSE(s.in_cauldron);
  EXPECT_EQ(s.potions_empty.count(), 0u);
  for (int i = 10; i < kStepsPerEpisode; ++i) s = step(task, s, EnvAction::noop()).state;
  EXPECT_TRUE(s.finished);
  EXPECT_THROW(step(task, s, EnvAction::noop()), EpisodeFinished);
}

TEST(Step, DeterministicTrajectories) {
  Task task(parse_cube_line("101101011010 7"));
  auto run = [&] {
    Rng rng(9);
    EnvState s = reset_episode(task, 11);
    std::vector<std::pair<EnvState, int>> out;
    for (int t = 0; t < kStepsPerEpisode; ++t) {
      auto r = step(task, s, EnvAction(1 + int(uniform_below(rng, 8))));
      out.emplace_back(r.state, r.reward);
      s = r.state;
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Step, AtMostOneNonzeroRewardPerTrialAndPotionsMonotone) {
  Task task(parse_cube_line("110011101001 5"));
  Rng rng(4);
  EnvState s = reset_episode(task, 8);
  int nonzero = 0;
  for (int t = 0; t < kStepsPerEpisode; ++t) {
    EnvAction a(1 + int(uniform_below(rng, 8)));
    auto r = step(task, s, a);
    if (r.reward != 0) {
      EXPECT_TRUE(a.is_deposit());
      EXPECT_FALSE(s.in_cauldron);
      ++nonzero;
    }
    if (r.state.trial == s.trial) {
      EXPECT_EQ((s.potions_empty & ~r.state.potions_empty).count(), 0u);
    }
    if (r.state.trial != s.trial || r.state.finished) {
      EXPECT_LE(nonzero, 1);
      nonzero = 0;
    }
    s = r.state;
  }
}

TEST(EncodeState, Layout) {
  Task task = full_task();
  EnvState s = at_stone(task, VertexId(7));
  StateRow expected{1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
  EXPECT_EQ(encode_state(s), expected);

  StateRow far = encode_state(at_stone(task, VertexId(0)));
  EXPECT_EQ(far[10], 1);
  EXPECT_EQ(far[11] + far[12] + far[13], 0);

  EnvState used = step(task, at_stone(task, VertexId(4)), EnvAction(3)).state;
  EXPECT_EQ(encode_state(used)[4], 1);
}

TEST(OptimalTrialReward, Examples) {
  Cube full(EdgeSet().set(), VertexId(7));
  Cube empty(EdgeSet(), VertexId(7));
  for (int v = 0; v < 8; ++v) EXPECT_EQ(optimal_trial_reward(full, VertexId(v)), 15);
  EXPECT_EQ(optimal_trial_reward(empty, VertexId(7)), 15);
  EXPECT_EQ(optimal_trial_reward(empty, VertexId(3)), 1);
  EXPECT_EQ(optimal_trial_reward(empty, VertexId(0)), 0);  // never deposit
}

TEST(OptimalTrialReward, AtLeastImmediateDeposit) {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    Cube c(EdgeSet(uniform_below(rng, 4096)), VertexId(int(uniform_below(rng, 8))));
    for (int v = 0; v < 8; ++v)
      EXPECT_GE(optimal_trial_reward(c, VertexId(v)), deposit_reward(VertexId(v), *c.goal_vertex()));
  }
}

TEST(OptimalTrialReward, MatchesExhaustiveSearchOnSample) {
  Rng rng(17);
  for (int i = 0; i < 16; ++i) {
    Task task(Cube(EdgeSet(uniform_below(rng, 4096)), VertexId(7)));
    for (int v = 0; v < 8; ++v)
      EXPECT_EQ(optimal_trial_reward(task.cube, VertexId(v)), oracle::exhaustive_trial_reward(task, VertexId(v)));
  }
}

TEST(OptimalTrialReward, ShortHorizon) {
  Task task(Cube(EdgeSet().set(), VertexId(7)));
  // Three potions plus a deposit need four steps.
  EXPECT_EQ(optimal_trial_reward(task.cube, VertexId(0), 3), 1);
  EXPECT_EQ(optimal_trial_reward(task.cube, VertexId(0), 4), 15);
  EXPECT_EQ(oracle::exhaustive_trial_reward(task, VertexId(0), 3), 1);
}

TEST(ActionMapping, Bijection) {
  EXPECT_EQ(partial_to_env_action(PartialAction::noop()).number, 1);
  EXPECT_EQ(partial_to_env_action(PartialAction::deposit()).number, 2);
  EXPECT_EQ(partial_to_env_action(PartialAction::traverse(2, Direction::Up)).number, 8);
  EXPECT_EQ(partial_to_env_action(PartialAction::traverse(0, Direction::Down)).number, 3);
  for (int c = 0; c < 8; ++c) {
    auto x = PartialAction::from_code(c);
    EXPECT_EQ(env_to_partial_action(partial_to_env_action(x)), x);
    if (x.is_traverse()) {
      EXPECT_EQ(partial_to_env_action(x), EnvAction::potion(x.axis(), x.direction()));
    }
  }
  EXPECT_THROW(EnvAction(0), std::out_of_range);
  EXPECT_THROW(EnvAction(9), std::out_of_range);
}
