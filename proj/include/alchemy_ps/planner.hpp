#pragma once

// Value iteration on the 9-state partial model (8 vertices plus an absorbing
// state entered by depositing).

#include "alchemy_ps/cube.hpp"
#include "alchemy_ps/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace alchemy_ps {

struct PartialMdp {
  EdgeProbs edge_probs;
  RewardProbs reward;
  double gamma = 0.9;

  static PartialMdp from_cube(const Cube& cube, double gamma = 0.9) {
    return {cube.edge_probs(), cube.reward, gamma};
  }
};

struct PlanResult {
  std::array<double, kNumVertices> values{};
  std::array<std::array<double, kNumPartialActions>, kNumVertices> q{};
  /// Greedy action per vertex; ties resolved to the lowest action code.
  std::array<PartialAction, kNumVertices> policy{};
  int iterations = 0;
  bool converged = false;
};

struct PlannerOptions {
  double tol = 1e-9;
  int max_iters = 1000;
};

namespace detail {

inline void validate(const PartialMdp& mdp) {
  if (!std::isfinite(mdp.gamma) || mdp.gamma <= 0.0 || mdp.gamma >= 1.0)
    throw std::invalid_argument("discount must lie in (0, 1)");
  for (double p : mdp.edge_probs.p)
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw std::invalid_argument("edge probabilities must lie in [0, 1]");
  for (const auto& row : mdp.reward.p)
    for (double r : row)
      if (!std::isfinite(r)) throw std::invalid_argument("rewards must be finite");
}

inline double q_value(const PartialMdp& mdp, const std::array<double, kNumVertices>& values, VertexId v,
                      PartialAction x) {
  const double r = mdp.reward.at(v, x);
  if (x.is_deposit()) return r;
  if (x.is_noop()) return r + mdp.gamma * values[v.index];
  const int axis = x.axis();
  if (v.coord(axis) == target_coord(x.direction())) return r + mdp.gamma * values[v.index];
  const double p = mdp.edge_probs[edge_along(v, axis).index];
  return r + mdp.gamma * (p * values[v.flipped(axis).index] + (1.0 - p) * values[v.index]);
}

inline double tie_tolerance(double tol, double best) { return tol * std::max(1.0, std::abs(best)); }

}  // namespace detail

/// Synchronous Bellman backups from V = 0 until the largest change drops
/// below tol * (1 - gamma) / gamma, which bounds the distance to the fixed
/// point by `tol`, or `max_iters` is reached.
inline PlanResult value_iteration(const PartialMdp& mdp, PlannerOptions opts = {}) {
  detail::validate(mdp);
  PlanResult out;
  auto& V = out.values;
  const double stop = opts.tol * (1.0 - mdp.gamma) / mdp.gamma;
  for (out.iterations = 0; out.iterations < opts.max_iters;) {
    std::array<double, kNumVertices> next{};
    double delta = 0.0;
    for (int v = 0; v < kNumVertices; ++v) {
      double best = -INFINITY;
      for (int x = 0; x < kNumPartialActions; ++x)
        best = std::max(best, detail::q_value(mdp, V, VertexId(v), PartialAction::from_code(x)));
      next[v] = best;
      delta = std::max(delta, std::abs(best - V[v]));
    }
    V = next;
    ++out.iterations;
    if (delta < stop) {
      out.converged = true;
      break;
    }
  }

  for (int v = 0; v < kNumVertices; ++v) {
    for (int x = 0; x < kNumPartialActions; ++x)
      out.q[v][x] = detail::q_value(mdp, V, VertexId(v), PartialAction::from_code(x));
    const auto& qv = out.q[v];
    const double best = *std::max_element(qv.begin(), qv.end());
    for (int x = 0; x < kNumPartialActions; ++x) {
      if (qv[x] >= best - detail::tie_tolerance(opts.tol, best)) {
        out.policy[v] = PartialAction::from_code(x);
        break;
      }
    }
  }
  return out;
}

/// Greedy action at `v`, drawing uniformly among Q-maximizers tied within
/// `tol`. A unique maximizer consumes no randomness.
inline PartialAction greedy_action(const PlanResult& plan, VertexId v, Rng& rng, double tol = 1e-9) {
  const auto& qv = plan.q[v.index];
  const double best = *std::max_element(qv.begin(), qv.end());
  std::array<int, kNumPartialActions> tied{};
  int count = 0;
  for (int x = 0; x < kNumPartialActions; ++x)
    if (qv[x] >= best - detail::tie_tolerance(tol, best)) tied[count++] = x;
  if (count == 1) return PartialAction::from_code(tied[0]);
  return PartialAction::from_code(tied[uniform_below(rng, static_cast<std::uint64_t>(count))]);
}

}  // namespace alchemy_ps
