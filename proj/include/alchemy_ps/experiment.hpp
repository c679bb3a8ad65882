#pragma once

// Declarative experiment runs: cube enumeration, dataset generation and
// agent evaluation, each leaving a manifest that is enough to rerun it.

#include "alchemy_ps/agent.hpp"
#include "alchemy_ps/belief.hpp"
#include "alchemy_ps/datagen.hpp"
#include "alchemy_ps/evaluation.hpp"
#include "alchemy_ps/hypothesis_space.hpp"
#include "alchemy_ps/learned_client.hpp"
#include "alchemy_ps/parallel.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace alchemy_ps {

inline constexpr const char* kToolVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hash_hex(std::string_view data) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

struct AgentSpec {
  std::string name;
  std::optional<EngineKind> engine;  // none for the random policy
  AgentMode mode = AgentMode::Sample;
  int resample_every = 1;
};

/// Shorthands: exact, uniform, true, random, external, and "<engine>-mean".
inline AgentSpec agent_from_shorthand(const std::string& text) {
  AgentSpec a;
  a.name = text;
  std::string engine = text;
  if (text.size() > 5 && text.ends_with("-mean")) {
    engine = text.substr(0, text.size() - 5);
    a.mode = AgentMode::Mean;
  }
  if (engine == "exact") a.engine = EngineKind::ExactBayes;
  else if (engine == "uniform") a.engine = EngineKind::NonAdaptive;
  else if (engine == "true") a.engine = EngineKind::TrueModel;
  else if (engine == "external") a.engine = EngineKind::ExternalLearned;
  else if (engine == "random" && a.mode == AgentMode::Sample) a.mode = AgentMode::RandomPolicy;
  else throw ConfigError("unknown agent '" + text + "'");
  return a;
}

struct RunConfig {
  std::string hypothesis = "connected";
  int goal_vertex = 7;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
  std::optional<std::array<std::size_t, 3>> split_sizes;
  std::uint64_t split_seed = 0;
  std::string split_file;

  std::vector<AgentSpec> agents{agent_from_shorthand("exact"), agent_from_shorthand("uniform"),
                                agent_from_shorthand("true"), agent_from_shorthand("random")};
  std::string eval_split = "test";
  int eval_cubes = 10;  // 0 = every cube of the split
  int eval_episodes = 20;

  int data_episodes_per_cube = 500;
  std::vector<std::string> data_splits{"train", "val", "test"};

  std::uint64_t seed = 0;
  double gamma = 0.9;
  std::string out_dir = "out";
  std::string external_endpoint;
  int external_timeout_ms = 30000;
  unsigned jobs = 0;  // 0 = available parallelism
};

namespace detail {

inline nlohmann::ordered_json agent_to_json(const AgentSpec& a) {
  nlohmann::ordered_json j;
  j["name"] = a.name;
  j["engine"] = a.engine ? to_string(*a.engine) : "none";
  j["mode"] = to_string(a.mode);
  j["resample_every"] = a.resample_every;
  return j;
}

inline AgentSpec agent_from_json(const nlohmann::json& j) {
  if (j.is_string()) return agent_from_shorthand(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("agent entries must be strings or objects");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "name" && it.key() != "engine" && it.key() != "mode" && it.key() != "resample_every")
      throw ConfigError("unknown agent key '" + it.key() + "'");
  AgentSpec a;
  a.name = j.at("name").get<std::string>();
  const std::string engine = j.value("engine", std::string("none"));
  const std::string mode = j.value("mode", std::string("sample"));
  if (engine == "exact") a.engine = EngineKind::ExactBayes;
  else if (engine == "uniform") a.engine = EngineKind::NonAdaptive;
  else if (engine == "true") a.engine = EngineKind::TrueModel;
  else if (engine == "external") a.engine = EngineKind::ExternalLearned;
  else if (engine != "none") throw ConfigError("unknown engine '" + engine + "'");
  if (mode == "sample") a.mode = AgentMode::Sample;
  else if (mode == "mean") a.mode = AgentMode::Mean;
  else if (mode == "random") a.mode = AgentMode::RandomPolicy;
  else throw ConfigError("unknown mode '" + mode + "'");
  a.resample_every = j.value("resample_every", 1);
  if (a.resample_every < 1) throw ConfigError("resample_every must be at least 1");
  if ((a.mode == AgentMode::RandomPolicy) != !a.engine)
    throw ConfigError("agent '" + a.name + "': mode 'random' goes with engine 'none' and only with it");
  return a;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["hypothesis"] = c.hypothesis;
  j["goal_vertex"] = c.goal_vertex;
  j["split_ratios"] = c.split_ratios;
  if (c.split_sizes) j["split_sizes"] = *c.split_sizes;
  j["split_seed"] = c.split_seed;
  if (!c.split_file.empty()) j["split_file"] = c.split_file;
  j["agents"] = nlohmann::ordered_json::array();
  for (const auto& a : c.agents) j["agents"].push_back(detail::agent_to_json(a));
  j["eval_split"] = c.eval_split;
  j["eval_cubes"] = c.eval_cubes;
  j["eval_episodes"] = c.eval_episodes;
  j["data_episodes_per_cube"] = c.data_episodes_per_cube;
  j["data_splits"] = c.data_splits;
  j["seed"] = c.seed;
  j["gamma"] = c.gamma;
  j["out_dir"] = c.out_dir;
  if (!c.external_endpoint.empty()) j["external_endpoint"] = c.external_endpoint;
  j["external_timeout_ms"] = c.external_timeout_ms;
  j["jobs"] = c.jobs;
  return j;
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are errors.
inline RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c = std::move(base);
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "hypothesis") c.hypothesis = v.get<std::string>();
      else if (k == "goal_vertex") c.goal_vertex = v.get<int>();
      else if (k == "split_ratios") c.split_ratios = v.get<std::array<double, 3>>();
      else if (k == "split_sizes") c.split_sizes = v.get<std::array<std::size_t, 3>>();
      else if (k == "split_seed") c.split_seed = v.get<std::uint64_t>();
      else if (k == "split_file") c.split_file = v.get<std::string>();
      else if (k == "agents") {
        c.agents.clear();
        for (const auto& a : v) c.agents.push_back(detail::agent_from_json(a));
      } else if (k == "eval_split") c.eval_split = v.get<std::string>();
      else if (k == "eval_cubes") c.eval_cubes = v.get<int>();
      else if (k == "eval_episodes") c.eval_episodes = v.get<int>();
      else if (k == "data_episodes_per_cube") c.data_episodes_per_cube = v.get<int>();
      else if (k == "data_splits") c.data_splits = v.get<std::vector<std::string>>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "gamma") c.gamma = v.get<double>();
      else if (k == "out_dir") c.out_dir = v.get<std::string>();
      else if (k == "external_endpoint") c.external_endpoint = v.get<std::string>();
      else if (k == "external_timeout_ms") c.external_timeout_ms = v.get<int>();
      else if (k == "jobs") c.jobs = v.get<unsigned>();
      else throw ConfigError("unknown config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

inline void validate(const RunConfig& c) {
  if (c.goal_vertex < 0 || c.goal_vertex >= kNumVertices) throw ConfigError("goal_vertex must be in 0..7");
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (c.eval_cubes < 0 || c.eval_episodes < 0 || c.data_episodes_per_cube < 0)
    throw ConfigError("counts must be nonnegative");
  if (c.eval_split != "train" && c.eval_split != "val" && c.eval_split != "test")
    throw ConfigError("eval_split must be train, val or test");
  for (const auto& s : c.data_splits)
    if (s != "train" && s != "val" && s != "test") throw ConfigError("unknown data split '" + s + "'");
  if (c.external_timeout_ms <= 0) throw ConfigError("external_timeout_ms must be positive");
  std::vector<std::string> names;
  for (const auto& a : c.agents) {
    if (a.name.empty() || a.name.find_first_of(",\n\"") != std::string::npos)
      throw ConfigError("agent names must be nonempty and free of commas and quotes");
    for (const auto& n : names)
      if (n == a.name) throw ConfigError("duplicate agent name '" + a.name + "'");
    names.push_back(a.name);
  }
  try {
    (void)HypothesisSource::parse(c.hypothesis);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!c.split_file.empty() && !std::filesystem::exists(c.split_file))
    throw ConfigError("split_file '" + c.split_file + "' does not exist");
  auto src = HypothesisSource::parse(c.hypothesis);
  if (src.kind == CubeSource::File && !std::filesystem::exists(src.path))
    throw ConfigError("cube file '" + src.path + "' does not exist");
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  // A run manifest carries its full config under "config".
  if (j.is_object() && j.contains("config") && j.contains("tool")) j = j["config"];
  return config_from_json(j, std::move(base));
}

/// Hypothesis set, split and the text they were derived from.
struct ResolvedInputs {
  std::shared_ptr<const CubeSet> set;
  Split split;
  std::string cube_text;
  std::string split_text;
};

inline ResolvedInputs resolve_inputs(const RunConfig& c) {
  validate(c);
  ResolvedInputs r;
  const auto src = HypothesisSource::parse(c.hypothesis, VertexId(c.goal_vertex));
  auto set = std::make_shared<CubeSet>(enumerate(src));
  if (set->size() == 0) throw ConfigError("hypothesis set is empty");
  std::ostringstream cubes;
  write_cube_set(cubes, *set);
  r.cube_text = cubes.str();
  r.set = set;

  try {
    if (!c.split_file.empty()) {
      std::ifstream in(c.split_file);
      r.split = read_split(in);
      for (const auto* part : {&r.split.train, &r.split.val, &r.split.test})
        for (auto i : *part)
          if (i >= set->size()) throw ConfigError("split index " + std::to_string(i) + " outside the cube set");
    } else if (c.split_sizes) {
      r.split = split_by_sizes(set->size(), *c.split_sizes, c.split_seed);
    } else {
      r.split = split(*set, c.split_ratios, c.split_seed);
    }
  } catch (const SplitError& e) {
    throw ConfigError(e.what());
  }
  std::ostringstream split_text;
  write_split(split_text, r.split);
  r.split_text = split_text.str();
  return r;
}

inline const std::vector<std::size_t>& split_part(const Split& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "val") return s.val;
  return s.test;
}

inline nlohmann::ordered_json manifest_base(const char* command, const RunConfig& c, const ResolvedInputs& in) {
  nlohmann::ordered_json m;
  m["tool"] = "alchemy_ps";
  m["version"] = kToolVersion;
  m["layout_version"] = kContextLayoutVersion;
  m["command"] = command;
  m["config"] = to_json(c);
  m["seeds"] = {{"seed", c.seed}, {"split_seed", c.split_seed}};
  m["hashes"] = nlohmann::ordered_json::object();
  m["hashes"]["cube_set"] = hash_hex(in.cube_text);
  const auto src = HypothesisSource::parse(c.hypothesis);
  if (src.kind == CubeSource::File) m["hashes"]["cube_file"] = hash_hex(read_file(src.path));
  m["hashes"]["split"] = hash_hex(in.split_text);
  m["split"] = {{"train", in.split.train}, {"val", in.split.val}, {"test", in.split.test}};
  return m;
}

inline unsigned effective_jobs(const RunConfig& c) { return c.jobs ? c.jobs : default_jobs(); }

/// Writes the cube set in canonical order; returns the number of cubes.
inline std::size_t cmd_enum_cubes(const HypothesisSource& source, const std::string& out_path) {
  CubeSet set = enumerate(source);
  std::ostringstream text;
  write_cube_set(text, set);
  write_file(out_path, text.str());
  return set.size();
}

struct GenDataResult {
  std::vector<std::pair<std::string, std::size_t>> records;  // per split
  std::filesystem::path manifest;
};

/// Writes cubes.txt, split.txt, <split>.ndjson per requested split and
/// manifest.json into out_dir.
inline GenDataResult cmd_gen_data(const RunConfig& c) {
  ResolvedInputs in = resolve_inputs(c);
  const std::filesystem::path dir(c.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "cubes.txt", in.cube_text);
  write_file(dir / "split.txt", in.split_text);

  auto manifest = manifest_base("gen-data", c, in);
  manifest["outputs"] = nlohmann::ordered_json::object();
  manifest["outputs"]["cubes.txt"] = hash_hex(in.cube_text);
  manifest["outputs"]["split.txt"] = hash_hex(in.split_text);

  GenDataResult result;
  for (const auto& part : c.data_splits) {
    const auto path = dir / (part + ".ndjson");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const auto& ids = split_part(in.split, part);
    const std::size_t n = generate_dataset(*in.set, ids, c.data_episodes_per_cube, c.seed, out, effective_jobs(c));
    out.close();
    result.records.emplace_back(part, n);
    manifest["outputs"][part + ".ndjson"] = hash_hex(read_file(path));
    manifest["records"][part] = n;
  }
  result.manifest = dir / "manifest.json";
  write_file(result.manifest, manifest.dump(2) + "\n");
  return result;
}

struct AgentOutcome {
  std::string name;
  bool ok = true;
  std::string error;
  std::vector<MetricSeries> runs;  // cube-major, then episode
};

struct EvalResult {
  std::vector<std::size_t> cube_ids;
  std::vector<AgentOutcome> agents;
  std::filesystem::path metrics_csv, aggregate_csv, manifest;
  bool external_failed() const {
    for (const auto& a : agents)
      if (!a.ok) return true;
    return false;
  }
};

namespace detail {

inline std::unique_ptr<BeliefEngine> make_engine(EngineKind kind, const RunConfig& c,
                                                 const std::shared_ptr<const CubeSet>& set, const Task& task) {
  const RewardProbs reward = RewardProbs::single_goal(task.goal);
  switch (kind) {
    case EngineKind::ExactBayes: return std::make_unique<ExactBayesEngine>(set, reward);
    case EngineKind::NonAdaptive: return std::make_unique<NonAdaptiveEngine>(set, reward);
    case EngineKind::TrueModel: return std::make_unique<TrueModelEngine>(task.cube, reward);
    case EngineKind::ExternalLearned:
      if (c.external_endpoint.empty()) throw ProtocolError("no external_endpoint configured");
      return std::make_unique<ExternalLearnedEngine>(open_endpoint(c.external_endpoint), reward,
                                                     std::chrono::milliseconds(c.external_timeout_ms));
  }
  throw std::logic_error("unknown engine kind");
}

}  // namespace detail

/// Runs one agent over the given cubes and episodes.
inline AgentOutcome evaluate_agent(const AgentSpec& spec, const RunConfig& c, const std::shared_ptr<const CubeSet>& set,
                                   const std::vector<std::size_t>& cube_ids) {
  AgentOutcome out;
  out.name = spec.name;
  const std::size_t episodes = static_cast<std::size_t>(c.eval_episodes);
  out.runs.resize(cube_ids.size() * episodes);
  const std::uint64_t agent_key = fnv1a64(spec.name);
  try {
    parallel_for(out.runs.size(), effective_jobs(c), [&](std::size_t i) {
      const std::size_t cube_id = cube_ids[i / episodes];
      const std::uint64_t ep = i % episodes;
      Task task((*set)[cube_id]);
      AgentConfig cfg;
      cfg.mode = spec.mode;
      cfg.resample_every = spec.resample_every;
      cfg.gamma = c.gamma;
      cfg.seed = derive_seed(c.seed, {cube_id, ep, agent_key});
      std::unique_ptr<BeliefEngine> engine;
      if (spec.engine) {
        try {
          engine = detail::make_engine(*spec.engine, c, set, task);
        } catch (const ProtocolError& e) {
          throw EngineError(0, e.what());
        }
      }
      EpisodeLog log = run_episode(task, engine.get(), cfg, episode_env_seed(c.seed, cube_id, ep));
      out.runs[i] = compute_metrics(log, task.cube);
    });
  } catch (const EngineError& e) {
    out.ok = false;
    out.error = e.what();
    out.runs.clear();
  }
  return out;
}

/// Writes metrics.csv, aggregate.csv and manifest.json into out_dir. Engine
/// failures mark that agent as failed and leave the others untouched.
inline EvalResult cmd_eval(const RunConfig& c) {
  ResolvedInputs in = resolve_inputs(c);
  EvalResult result;
  const auto& part = split_part(in.split, c.eval_split);
  const std::size_t n = c.eval_cubes == 0 ? part.size() : std::min<std::size_t>(part.size(), c.eval_cubes);
  result.cube_ids.assign(part.begin(), part.begin() + static_cast<std::ptrdiff_t>(n));

  for (const auto& spec : c.agents) result.agents.push_back(evaluate_agent(spec, c, in.set, result.cube_ids));

  std::ostringstream metrics, agg;
  write_metrics_header(metrics);
  write_aggregate_header(agg);
  for (const auto& a : result.agents) {
    if (!a.ok) continue;
    const std::size_t episodes = static_cast<std::size_t>(c.eval_episodes);
    for (std::size_t i = 0; i < a.runs.size(); ++i)
      write_metrics_rows(metrics, a.name, result.cube_ids[i / episodes], static_cast<int>(i % episodes), a.runs[i]);
    write_aggregate_rows(agg, a.name, aggregate(a.runs));
  }

  const std::filesystem::path dir(c.out_dir);
  std::filesystem::create_directories(dir);
  result.metrics_csv = dir / "metrics.csv";
  result.aggregate_csv = dir / "aggregate.csv";
  write_file(result.metrics_csv, metrics.str());
  write_file(result.aggregate_csv, agg.str());

  auto manifest = manifest_base("eval", c, in);
  manifest["eval_cubes"] = result.cube_ids;
  manifest["outputs"] = {{"metrics.csv", hash_hex(metrics.str())}, {"aggregate.csv", hash_hex(agg.str())}};
  manifest["agents"] = nlohmann::ordered_json::array();
  for (const auto& a : result.agents) {
    nlohmann::ordered_json entry{{"name", a.name}, {"ok", a.ok}};
    if (!a.ok) entry["error"] = a.error;
    manifest["agents"].push_back(entry);
  }
  manifest["notes"] = {kMetricsCsvNote};
  result.manifest = dir / "manifest.json";
  write_file(result.manifest, manifest.dump(2) + "\n");
  return result;
}

}  // namespace alchemy_ps
