#pragma once

// Belief engines: the inference side of the posterior sampling loop.
//
// Every engine consumes raw environment transitions and exposes a snapshot
// of edge and reward marginals plus the current vertex. Engines that hold a
// full distribution over a cube set can also draw a cube from it directly.

#include "alchemy_ps/cube.hpp"
#include "alchemy_ps/env.hpp"
#include "alchemy_ps/hypothesis_space.hpp"
#include "alchemy_ps/random.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace alchemy_ps {

struct Evidence {
  EdgeId edge;
  bool present = false;
  bool operator==(const Evidence&) const = default;
};

/// Edge evidence carried by one transition. Only a full potion applied to a
/// stone outside the cauldron that is not already at the potion's target
/// coordinate says anything about an edge. Transitions that cross a trial
/// boundary are uninformative because the next state shows the freshly
/// reset stone.
inline std::optional<Evidence> extract_edge_evidence(const EnvState& prev, EnvAction action,
                                                     const EnvState& next) {
  if (!action.is_potion() || prev.in_cauldron || prev.finished) return std::nullopt;
  if (prev.potions_empty.test(action.slot())) return std::nullopt;
  if (prev.stone.coord(action.axis()) == target_coord(action.direction())) return std::nullopt;
  if (next.trial != prev.trial) return std::nullopt;
  return Evidence{edge_along(prev.stone, action.axis()), next.stone != prev.stone};
}

class InconsistentEvidence : public std::runtime_error {
 public:
  InconsistentEvidence()
      : std::runtime_error("evidence contradicts every cube in the hypothesis set") {}
};

struct Posterior {
  std::vector<double> weights;

  static Posterior uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("posterior over an empty cube set");
    return Posterior{std::vector<double>(n, 1.0 / static_cast<double>(n))};
  }
};

inline Posterior exact_observe(const Posterior& post, const CubeSet& set, const Evidence& ev) {
  Posterior out = post;
  double total = 0.0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (set[k].has_edge(ev.edge) != ev.present) out.weights[k] = 0.0;
    total += out.weights[k];
  }
  if (!(total > 0.0)) throw InconsistentEvidence();
  for (double& w : out.weights) w /= total;
  return out;
}

inline EdgeProbs edge_marginals(const Posterior& post, const CubeSet& set) {
  EdgeProbs m;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const double w = post.weights[k];
    if (w == 0.0) continue;
    const auto& edges = set[k].edges;
    for (int n = 0; n < kNumEdges; ++n)
      if (edges.test(n)) m.p[n] += w;
  }
  for (double& p : m.p) p = std::min(1.0, p);
  return m;
}

/// Index drawn from normalized weights.
inline std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

struct BeliefSnapshot {
  EdgeProbs edge_marginals;
  RewardProbs reward_marginals;
  VertexId vertex;
};

enum class EngineKind { ExactBayes, NonAdaptive, TrueModel, ExternalLearned };

inline const char* to_string(EngineKind k) {
  switch (k) {
    case EngineKind::ExactBayes: return "exact";
    case EngineKind::NonAdaptive: return "uniform";
    case EngineKind::TrueModel: return "true";
    case EngineKind::ExternalLearned: return "external";
  }
  return "?";
}

class BeliefEngine {
 public:
  virtual ~BeliefEngine() = default;

  /// Starts a new episode from its initial state with an empty context.
  virtual void reset(const EnvState& initial) = 0;
  virtual void observe(const EnvState& prev, EnvAction action, const EnvState& next) = 0;
  virtual BeliefSnapshot snapshot() = 0;

  /// A deterministic cube drawn from the full belief, for engines that hold
  /// one. Engines that only know marginals return nullopt and the caller
  /// samples independent edges instead.
  virtual std::optional<Cube> sample_model(Rng&) { return std::nullopt; }

  virtual EngineKind kind() const = 0;
};

/// Bayesian elimination over a known cube set, uniform prior.
class ExactBayesEngine final : public BeliefEngine {
 public:
  ExactBayesEngine(std::shared_ptr<const CubeSet> set, RewardProbs reward)
      : set_(std::move(set)), reward_(reward), post_(Posterior::uniform(set_->size())) {}

  void reset(const EnvState& initial) override {
    post_ = Posterior::uniform(set_->size());
    vertex_ = initial.stone;
    marginals_.reset();
  }

  void observe(const EnvState& prev, EnvAction action, const EnvState& next) override {
    if (auto ev = extract_edge_evidence(prev, action, next)) {
      post_ = exact_observe(post_, *set_, *ev);
      marginals_.reset();
    }
    vertex_ = next.stone;
  }

  BeliefSnapshot snapshot() override {
    if (!marginals_) marginals_ = edge_marginals(post_, *set_);
    return {*marginals_, reward_, vertex_};
  }

  std::optional<Cube> sample_model(Rng& rng) override {
    return Cube((*set_)[sample_index(post_.weights, rng)].edges, reward_);
  }

  EngineKind kind() const override { return EngineKind::ExactBayes; }
  const Posterior& posterior() const { return post_; }

 private:
  std::shared_ptr<const CubeSet> set_;
  RewardProbs reward_;
  Posterior post_;
  std::optional<EdgeProbs> marginals_;
  VertexId vertex_;
};

/// The uniform prior over the cube set, never updated.
class NonAdaptiveEngine final : public BeliefEngine {
 public:
  NonAdaptiveEngine(std::shared_ptr<const CubeSet> set, RewardProbs reward)
      : set_(std::move(set)),
        reward_(reward),
        marginals_(edge_marginals(Posterior::uniform(set_->size()), *set_)) {}

  void reset(const EnvState& initial) override { vertex_ = initial.stone; }
  void observe(const EnvState&, EnvAction, const EnvState& next) override { vertex_ = next.stone; }
  BeliefSnapshot snapshot() override { return {marginals_, reward_, vertex_}; }

  std::optional<Cube> sample_model(Rng& rng) override {
    return Cube((*set_)[uniform_below(rng, set_->size())].edges, reward_);
  }

  EngineKind kind() const override { return EngineKind::NonAdaptive; }

 private:
  std::shared_ptr<const CubeSet> set_;
  RewardProbs reward_;
  EdgeProbs marginals_;
  VertexId vertex_;
};

/// Belief already collapsed onto the ground-truth cube.
class TrueModelEngine final : public BeliefEngine {
 public:
  TrueModelEngine(Cube truth, RewardProbs reward) : truth_(truth.edges, reward) {}

  void reset(const EnvState& initial) override { vertex_ = initial.stone; }
  void observe(const EnvState&, EnvAction, const EnvState& next) override { vertex_ = next.stone; }
  BeliefSnapshot snapshot() override { return {truth_.edge_probs(), truth_.reward, vertex_}; }
  std::optional<Cube> sample_model(Rng&) override { return truth_; }

  EngineKind kind() const override { return EngineKind::TrueModel; }

 private:
  Cube truth_;
  VertexId vertex_;
};

}  // namespace alchemy_ps
