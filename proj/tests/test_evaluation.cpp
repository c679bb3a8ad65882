#include "alchemy_ps/evaluation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace alchemy_ps;

TEST(EdgeMae, Examples) {
  Cube full(EdgeSet().set(), VertexId(7));
  Cube empty(EdgeSet(), VertexId(7));
  EXPECT_DOUBLE_EQ(edge_mae(EdgeProbs::filled(0.5), full), 0.5);
  EXPECT_DOUBLE_EQ(edge_mae(full.edge_probs(), full), 0.0);
  EXPECT_DOUBLE_EQ(edge_mae(EdgeProbs::filled(1.0), empty), 1.0);
  EdgeProbs one_wrong = full.edge_probs();
  one_wrong[3] = 0.0;
  EXPECT_DOUBLE_EQ(edge_mae(one_wrong, full), 1.0 / 12);
}

TEST(RewardFraction, Examples) {
  EXPECT_DOUBLE_EQ(reward_fraction(15, 15), 1.0);
  EXPECT_DOUBLE_EQ(reward_fraction(1, 15), 1.0 / 15);
  EXPECT_DOUBLE_EQ(reward_fraction(-3, 1), -3.0);
  EXPECT_TRUE(std::isnan(reward_fraction(0, 0)));
}

TEST(Summarize, MeanAndStandardError) {
  std::vector<double> same{0.5, 0.5, 0.5};
  Summary s = summarize(same);
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
  EXPECT_DOUBLE_EQ(s.stderr_, 0.0);
  std::vector<double> one{2.0};
  EXPECT_DOUBLE_EQ(summarize(one).stderr_, 0.0);
  std::vector<double> xs{1, 2, 3, 4};
  s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stderr_, std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
  EXPECT_EQ(summarize(std::vector<double>{}).n, 0u);
}

TEST(UniqueStateActions, MonotoneAndBounded) {
  Task task(parse_cube_line("110011101001 7"));
  AgentConfig cfg;
  cfg.mode = AgentMode::RandomPolicy;
  EpisodeLog log = run_episode(task, nullptr, cfg, 1);
  MetricSeries m = compute_metrics(log, task.cube);
  EXPECT_EQ(m.unique_sa[0], 1);
  for (int t = 1; t < kStepsPerEpisode; ++t) {
    EXPECT_GE(m.unique_sa[t], m.unique_sa[t - 1]);
    EXPECT_LE(m.unique_sa[t], m.unique_sa[t - 1] + 1);
  }
  EXPECT_LE(m.unique_sa.back(), kNumVertices * kNumPartialActions);
  EXPECT_EQ(unique_state_actions(log, kStepsPerEpisode), m.unique_sa.back());
  EXPECT_TRUE(m.edge_mae.empty());
}

TEST(ComputeMetrics, TrueModelOnFullCube) {
  Task task(Cube(EdgeSet().set(), VertexId(7)));
  TrueModelEngine eng(task.cube, task.cube.reward);
  EpisodeLog log = run_episode(task, &eng, AgentConfig{}, 4);
  MetricSeries m = compute_metrics(log, task.cube);
  for (int i = 0; i < kTrialsPerEpisode; ++i) {
    EXPECT_FALSE(m.flagged[i]);
    EXPECT_DOUBLE_EQ(m.reward_fraction[i], 1.0);
  }
  ASSERT_EQ(m.edge_mae.size(), std::size_t(kStepsPerEpisode));
  for (double e : m.edge_mae) EXPECT_EQ(e, 0.0);
}

TEST(ComputeMetrics, FlagsTrialsWithoutPositiveOptimum) {
  Task task(Cube(EdgeSet(), VertexId(7)));
  AgentConfig cfg;
  cfg.mode = AgentMode::RandomPolicy;
  EpisodeLog log = run_episode(task, nullptr, cfg, 6);
  MetricSeries m = compute_metrics(log, task.cube);
  for (int i = 0; i < kTrialsPerEpisode; ++i) {
    const int d = hamming_distance(log.trials[i].start, VertexId(7));
    EXPECT_EQ(m.flagged[i], d >= 2);
    EXPECT_EQ(std::isnan(m.reward_fraction[i]), d >= 2);
  }
}

TEST(Aggregate, ExcludesFlaggedTrialsAndLayout) {
  MetricSeries a, b;
  a.reward_fraction.fill(1.0);
  b.reward_fraction.fill(0.5);
  b.flagged[0] = true;
  b.reward_fraction[0] = std::nan("");
  std::vector<MetricSeries> runs{a, b};
  auto rows = aggregate(runs);
  EXPECT_EQ(find_summary(rows, "reward_fraction", 1).n, 1u);
  EXPECT_DOUBLE_EQ(find_summary(rows, "reward_fraction", 1).mean, 1.0);
  EXPECT_DOUBLE_EQ(find_summary(rows, "reward_fraction", 2).mean, 0.75);
  EXPECT_DOUBLE_EQ(find_summary(rows, "flagged", 1).mean, 0.5);
  EXPECT_THROW(find_summary(rows, "edge_mae", 1), std::out_of_range);
  EXPECT_EQ(rows.size(), std::size_t(4 * kTrialsPerEpisode + kStepsPerEpisode));
}

TEST(Csv, HeadersAndRows) {
  std::ostringstream out;
  write_metrics_header(out);
  MetricSeries m;
  m.flagged.fill(false);
  m.flagged[1] = true;
  m.reward_fraction.fill(0.25);
  m.edge_mae.assign(kStepsPerEpisode, 0.125);
  write_metrics_rows(out, "exact", 3, 0, m);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line[0], '#');
  std::getline(in, line);
  EXPECT_EQ(line, "agent,cube_id,episode,unit,index,metric,value");
  std::getline(in, line);
  EXPECT_EQ(line, "exact,3,0,trial,1,reward_fraction,0.25");
  EXPECT_EQ(out.str().find("exact,3,0,trial,2,reward_fraction"), std::string::npos);
  EXPECT_NE(out.str().find("exact,3,0,step,200,edge_mae,0.125\n"), std::string::npos);

  std::ostringstream agg;
  write_aggregate_header(agg);
  write_aggregate_rows(agg, "x", {{"trial", 1, "reward_fraction", Summary{}}});
  EXPECT_NE(agg.str().find("agent,unit,index,metric,mean,stderr,n\nx,trial,1,reward_fraction,nan,nan,0\n"),
            std::string::npos);
  EXPECT_EQ(format_number(1.0 / 3), "0.3333333333");
}
