#pragma once

// Offline training corpus: random-policy episodes on known cubes, written as
// NDJSON with the ground truth the learner is supervised on.

#include "alchemy_ps/agent.hpp"
#include "alchemy_ps/context.hpp"
#include "alchemy_ps/hypothesis_space.hpp"
#include "alchemy_ps/parallel.hpp"

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace alchemy_ps {

struct TrainingRecord {
  std::size_t cube_id = 0;
  std::uint64_t episode_id = 0;
  std::vector<ContextRow> rows;
  EdgeSet e_star;
  std::vector<VertexId> v_star;  // vertex of s_{t+1} for every row
  VertexId goal_vertex;
};

inline std::uint64_t episode_env_seed(std::uint64_t seed, std::size_t cube_id, std::uint64_t episode) {
  return derive_seed(seed, {cube_id, episode, 0});
}

inline std::uint64_t episode_policy_seed(std::uint64_t seed, std::size_t cube_id, std::uint64_t episode) {
  return derive_seed(seed, {cube_id, episode, 1});
}

inline TrainingRecord make_training_record(const CubeSet& set, std::size_t cube_id, std::uint64_t episode,
                                           std::uint64_t seed) {
  Task task(set[cube_id]);
  AgentConfig cfg;
  cfg.mode = AgentMode::RandomPolicy;
  cfg.seed = episode_policy_seed(seed, cube_id, episode);
  EpisodeLog log = run_episode(task, nullptr, cfg, episode_env_seed(seed, cube_id, episode));

  TrainingRecord rec;
  rec.cube_id = cube_id;
  rec.episode_id = episode;
  rec.rows = log.context.rows();
  rec.e_star = task.cube.edges;
  rec.goal_vertex = task.goal;
  rec.v_star.reserve(log.steps.size());
  for (std::size_t t = 0; t < log.steps.size(); ++t)
    rec.v_star.push_back(t + 1 < log.steps.size() ? log.steps[t + 1].state.stone : row_stone(rec.rows[t]));
  return rec;
}

/// One JSON object, fields in the order cube_id, episode_id, rows, e_star,
/// v_star, goal_vertex; all values are integers.
inline std::string to_ndjson(const TrainingRecord& rec) {
  std::string out;
  out.reserve(rec.rows.size() * (2 * kRowWidth + 3) + 600);
  out += "{\"cube_id\":" + std::to_string(rec.cube_id) + ",\"episode_id\":" + std::to_string(rec.episode_id) +
         ",\"rows\":[";
  for (std::size_t t = 0; t < rec.rows.size(); ++t) {
    out += t ? ",[" : "[";
    for (int i = 0; i < kRowWidth; ++i) {
      if (i) out += ',';
      out += static_cast<char>('0' + rec.rows[t][i]);
    }
    out += ']';
  }
  out += "],\"e_star\":[";
  for (int i = 0; i < kNumEdges; ++i) {
    if (i) out += ',';
    out += rec.e_star.test(i) ? '1' : '0';
  }
  out += "],\"v_star\":[";
  for (std::size_t t = 0; t < rec.v_star.size(); ++t) {
    if (t) out += ',';
    out += static_cast<char>('0' + rec.v_star[t].index);
  }
  out += "],\"goal_vertex\":" + std::to_string(rec.goal_vertex.index) + "}";
  return out;
}

class SinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `episodes_per_cube` records for every listed cube, cube-major, to
/// `sink`. Output is independent of `jobs`.
inline std::size_t generate_dataset(const CubeSet& set, std::span<const std::size_t> cube_ids, int episodes_per_cube,
                                    std::uint64_t seed, std::ostream& sink, unsigned jobs = 1) {
  if (episodes_per_cube < 0) throw std::invalid_argument("episodes_per_cube must be nonnegative");
  for (auto id : cube_ids)
    if (id >= set.size()) throw std::out_of_range("cube id " + std::to_string(id) + " outside the cube set");

  std::size_t count = 0;
  std::vector<std::string> lines(static_cast<std::size_t>(episodes_per_cube));
  for (auto id : cube_ids) {
    parallel_for(lines.size(), jobs, [&](std::size_t ep) { lines[ep] = to_ndjson(make_training_record(set, id, ep, seed)); });
    for (const auto& line : lines) {
      sink << line << '\n';
      if (!sink) throw SinkError("failed writing dataset record");
      ++count;
    }
  }
  sink.flush();
  if (!sink) throw SinkError("failed flushing dataset sink");
  return count;
}

}  // namespace alchemy_ps
