#pragma once

// Episode metrics (reward fraction per trial, edge MAE and unique
// state-action count per step), their aggregation, and CSV output.
//
// Index conventions: reward_fraction[i] is trial i+1; edge_mae[i] is the
// error of the belief conditioned on the first i+1 transitions; unique_sa[i]
// counts distinct (true vertex, partial action) pairs over steps 1..i+1.
// Unique state-actions range over all 8 partial actions, so at most 64.

#include "alchemy_ps/agent.hpp"
#include "alchemy_ps/cube.hpp"

#include <array>
#include <bitset>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace alchemy_ps {

inline double edge_mae(const EdgeProbs& marginals, const Cube& truth) {
  double sum = 0.0;
  for (int n = 0; n < kNumEdges; ++n) sum += std::abs(marginals[n] - (truth.edges.test(n) ? 1.0 : 0.0));
  return sum / kNumEdges;
}

/// Distinct (true vertex, partial action) pairs over the first `t` steps.
inline int unique_state_actions(const EpisodeLog& log, std::size_t t) {
  std::bitset<kNumVertices * kNumPartialActions> seen;
  for (std::size_t i = 0; i < t && i < log.steps.size(); ++i)
    seen.set(log.steps[i].true_vertex.index * kNumPartialActions + log.steps[i].partial_action.code());
  return static_cast<int>(seen.count());
}

inline double reward_fraction(int achieved, int optimal) {
  return optimal > 0 ? static_cast<double>(achieved) / optimal : std::numeric_limits<double>::quiet_NaN();
}

struct MetricSeries {
  std::array<double, kTrialsPerEpisode> reward_fraction{};  // NaN when the trial is flagged
  std::array<bool, kTrialsPerEpisode> flagged{};            // optimum <= 0
  std::array<int, kTrialsPerEpisode> trial_reward{};
  std::array<int, kTrialsPerEpisode> optimal_reward{};
  std::array<int, kTrialsPerEpisode> degenerate_steps{};
  std::vector<double> edge_mae;  // empty without beliefs
  std::array<int, kStepsPerEpisode> unique_sa{};
};

inline MetricSeries compute_metrics(const EpisodeLog& log, const Cube& truth) {
  MetricSeries m;
  for (int i = 0; i < kTrialsPerEpisode; ++i) {
    const auto& tr = log.trials[i];
    m.trial_reward[i] = tr.reward;
    m.optimal_reward[i] = tr.optimal;
    m.flagged[i] = tr.optimal <= 0;
    m.reward_fraction[i] = reward_fraction(tr.reward, tr.optimal);
  }
  std::bitset<kNumVertices * kNumPartialActions> seen;
  for (std::size_t t = 0; t < log.steps.size() && t < kStepsPerEpisode; ++t) {
    const auto& s = log.steps[t];
    seen.set(s.true_vertex.index * kNumPartialActions + s.partial_action.code());
    m.unique_sa[t] = static_cast<int>(seen.count());
    if (s.degenerate) ++m.degenerate_steps[t / kStepsPerTrial];
  }
  if (log.has_beliefs) {
    m.edge_mae.resize(kStepsPerEpisode);
    for (int t = 1; t <= kStepsPerEpisode; ++t) {
      const EdgeProbs& belief = t < static_cast<int>(log.steps.size()) ? log.steps[t].edge_marginals
                                                                        : log.final_marginals.value();
      m.edge_mae[t - 1] = edge_mae(belief, truth);
    }
  }
  return m;
}

/// Mean and standard error (sample standard deviation over sqrt(n)).
struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

struct AggregateRow {
  std::string unit;  // "trial" or "step"
  int index = 0;     // 1-based
  std::string metric;
  Summary summary;
};

/// Per-index summaries across episodes. Flagged trials are left out of the
/// reward_fraction averages.
inline std::vector<AggregateRow> aggregate(std::span<const MetricSeries> runs) {
  std::vector<AggregateRow> rows;
  if (runs.empty()) return rows;
  std::vector<double> xs;
  auto trial_metric = [&](const char* name, auto get) {
    for (int i = 0; i < kTrialsPerEpisode; ++i) {
      xs.clear();
      for (const auto& r : runs)
        if (auto v = get(r, i)) xs.push_back(*v);
      rows.push_back({"trial", i + 1, name, summarize(xs)});
    }
  };
  trial_metric("reward_fraction", [](const MetricSeries& r, int i) -> std::optional<double> {
    if (r.flagged[i]) return std::nullopt;
    return r.reward_fraction[i];
  });
  trial_metric("trial_reward", [](const MetricSeries& r, int i) -> std::optional<double> { return r.trial_reward[i]; });
  trial_metric("flagged", [](const MetricSeries& r, int i) -> std::optional<double> { return r.flagged[i] ? 1.0 : 0.0; });
  trial_metric("degenerate_steps",
               [](const MetricSeries& r, int i) -> std::optional<double> { return r.degenerate_steps[i]; });

  const bool beliefs = !runs.front().edge_mae.empty();
  for (int t = 0; t < kStepsPerEpisode; ++t) {
    if (beliefs) {
      xs.clear();
      for (const auto& r : runs) xs.push_back(r.edge_mae[t]);
      rows.push_back({"step", t + 1, "edge_mae", summarize(xs)});
    }
    xs.clear();
    for (const auto& r : runs) xs.push_back(r.unique_sa[t]);
    rows.push_back({"step", t + 1, "unique_sa", summarize(xs)});
  }
  return rows;
}

/// Looks up one aggregate entry; throws std::out_of_range when missing.
inline const Summary& find_summary(const std::vector<AggregateRow>& rows, const std::string& metric, int index) {
  for (const auto& r : rows)
    if (r.metric == metric && r.index == index) return r.summary;
  throw std::out_of_range("no aggregate row for " + metric + "[" + std::to_string(index) + "]");
}

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline constexpr const char* kMetricsCsvNote =
    "# unique_sa counts distinct (vertex, partial action) pairs over all 8 partial actions";

inline void write_metrics_header(std::ostream& out) {
  out << kMetricsCsvNote << '\n' << "agent,cube_id,episode,unit,index,metric,value\n";
}

/// One episode's rows. Flagged trials get no reward_fraction row.
inline void write_metrics_rows(std::ostream& out, const std::string& agent, std::size_t cube_id, int episode,
                               const MetricSeries& m) {
  const std::string prefix = agent + "," + std::to_string(cube_id) + "," + std::to_string(episode) + ",";
  for (int i = 0; i < kTrialsPerEpisode; ++i) {
    const std::string head = prefix + "trial," + std::to_string(i + 1) + ",";
    if (!m.flagged[i]) out << head << "reward_fraction," << format_number(m.reward_fraction[i]) << '\n';
    out << head << "trial_reward," << m.trial_reward[i] << '\n';
    out << head << "optimal_reward," << m.optimal_reward[i] << '\n';
    out << head << "degenerate_steps," << m.degenerate_steps[i] << '\n';
  }
  for (int t = 0; t < kStepsPerEpisode; ++t) {
    const std::string head = prefix + "step," + std::to_string(t + 1) + ",";
    if (!m.edge_mae.empty()) out << head << "edge_mae," << format_number(m.edge_mae[t]) << '\n';
    out << head << "unique_sa," << m.unique_sa[t] << '\n';
  }
}

inline void write_aggregate_header(std::ostream& out) {
  out << kMetricsCsvNote << '\n' << "agent,unit,index,metric,mean,stderr,n\n";
}

inline void write_aggregate_rows(std::ostream& out, const std::string& agent, const std::vector<AggregateRow>& rows) {
  for (const auto& r : rows) {
    out << agent << ',' << r.unit << ',' << r.index << ',' << r.metric << ',';
    if (r.summary.n == 0)
      out << "nan,nan,0\n";
    else
      out << format_number(r.summary.mean) << ',' << format_number(r.summary.stderr_) << ',' << r.summary.n << '\n';
  }
}

}  // namespace alchemy_ps
