#pragma once

// The per-step posterior sampling loop: snapshot beliefs, draw (or average)
// a partial model, plan on it, act from the believed vertex, feed the
// transition back to the engine.

#include "alchemy_ps/belief.hpp"
#include "alchemy_ps/context.hpp"
#include "alchemy_ps/env.hpp"
#include "alchemy_ps/line_channel.hpp"
#include "alchemy_ps/planner.hpp"
#include "alchemy_ps/random.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace alchemy_ps {

enum class AgentMode { Sample, Mean, RandomPolicy };

inline const char* to_string(AgentMode m) {
  switch (m) {
    case AgentMode::Sample: return "sample";
    case AgentMode::Mean: return "mean";
    case AgentMode::RandomPolicy: return "random";
  }
  return "?";
}

struct AgentConfig {
  AgentMode mode = AgentMode::Sample;
  int resample_every = 1;
  std::uint64_t seed = 0;
  double gamma = 0.9;
  PlannerOptions planner{};
};

struct StepRecord {
  EnvState state;
  VertexId true_vertex;
  VertexId believed_vertex;
  PartialAction partial_action;
  EnvAction env_action;
  int reward = 0;
  /// Belief conditioned on the transitions before this step.
  EdgeProbs edge_marginals;
  /// Edge vector the planner used: a 0/1 sample or the marginals.
  EdgeProbs planned_edges;
  /// The planned model gives the believed vertex no path to reward.
  bool degenerate = false;
};

struct TrialRecord {
  VertexId start;
  int reward = 0;
  int optimal = 0;
};

struct EpisodeLog {
  std::vector<StepRecord> steps;
  std::array<TrialRecord, kTrialsPerEpisode> trials{};
  /// Belief after all transitions; unset for the random policy.
  std::optional<EdgeProbs> final_marginals;
  bool has_beliefs = true;
  Context context;
};

/// Engine failure inside an episode, tagged with the step it happened at.
class EngineError : public std::runtime_error {
 public:
  EngineError(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Runs one 200-step episode. `engine` may be null only in RandomPolicy mode.
inline EpisodeLog run_episode(const Task& task, BeliefEngine* engine, const AgentConfig& config,
                              std::uint64_t env_seed) {
  if (config.resample_every < 1) throw std::invalid_argument("resample_every must be at least 1");
  const bool random_policy = config.mode == AgentMode::RandomPolicy;
  if (!random_policy && engine == nullptr) throw std::invalid_argument("model-based agent needs a belief engine");

  Rng model_rng(derive_seed(config.seed, {1}));
  Rng tie_rng(derive_seed(config.seed, {2}));
  Rng action_rng(derive_seed(config.seed, {3}));

  EpisodeLog log;
  log.has_beliefs = !random_policy;
  log.steps.reserve(kStepsPerEpisode);

  EnvState state = reset_episode(task, env_seed);
  if (!random_policy) engine->reset(state);

  PlanResult plan;
  EdgeProbs planned_edges;
  int since_sample = config.resample_every;

  for (int t = 0; t < kStepsPerEpisode; ++t) {
    StepRecord rec;
    rec.state = state;
    rec.true_vertex = state.stone;
    if (state.step_in_trial == 0) {
      auto& trial = log.trials[state.trial];
      trial.start = state.stone;
      trial.optimal = optimal_trial_reward(task.cube, state.stone);
    }

    if (random_policy) {
      rec.env_action = state.in_cauldron ? EnvAction::noop()
                                         : EnvAction(1 + static_cast<int>(uniform_below(action_rng, kNumEnvActions)));
      rec.partial_action = env_to_partial_action(rec.env_action);
      rec.believed_vertex = state.stone;
    } else {
      BeliefSnapshot snap;
      try {
        snap = engine->snapshot();
      } catch (const ProtocolError& e) {
        throw EngineError(t, e.what());
      }
      rec.edge_marginals = snap.edge_marginals;
      rec.believed_vertex = snap.vertex;

      if (config.mode == AgentMode::Sample) {
        if (since_sample >= config.resample_every) {
          auto model = engine->sample_model(model_rng);
          if (!model) model = sample_cube(snap.edge_marginals, snap.reward_marginals, model_rng);
          plan = value_iteration(PartialMdp::from_cube(*model, config.gamma), config.planner);
          planned_edges = model->edge_probs();
          since_sample = 0;
        }
        ++since_sample;
      } else {
        plan = value_iteration(PartialMdp{snap.edge_marginals, snap.reward_marginals, config.gamma}, config.planner);
        planned_edges = snap.edge_marginals;
      }
      rec.planned_edges = planned_edges;
      rec.degenerate = plan.values[snap.vertex.index] <= 0.0;
      rec.partial_action = state.in_cauldron ? PartialAction::noop() : greedy_action(plan, snap.vertex, tie_rng);
      rec.env_action = partial_to_env_action(rec.partial_action);
    }

    StepResult result = step(task, state, rec.env_action);
    rec.reward = result.reward;
    log.trials[state.trial].reward += result.reward;

    if (!random_policy) {
      try {
        engine->observe(state, rec.env_action, result.state);
      } catch (const ProtocolError& e) {
        throw EngineError(t, e.what());
      }
    }
    log.context.append(rec.env_action, result.state);
    log.steps.push_back(rec);
    state = result.state;
  }

  if (!random_policy) {
    try {
      log.final_marginals = engine->snapshot().edge_marginals;
    } catch (const ProtocolError& e) {
      throw EngineError(kStepsPerEpisode, e.what());
    }
  }
  return log;
}

}  // namespace alchemy_ps
