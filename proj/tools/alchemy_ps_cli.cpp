// Command line entry point: enum-cubes, gen-data, eval.
//
// Exit codes: 0 success, 1 config error, 2 runtime error, 3 external
// inference engine error.

#include "alchemy_ps/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace alchemy_ps;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitExternal = 3;

struct Overrides {
  std::string config_path;
  std::string manifest_path;
  std::optional<std::string> hypothesis, out_dir, split_file, eval_split, external_endpoint;
  std::optional<int> goal_vertex, eval_cubes, eval_episodes, episodes_per_cube, external_timeout_ms;
  std::optional<std::uint64_t> seed, split_seed;
  std::optional<double> gamma;
  std::optional<unsigned> jobs;
  std::vector<std::string> agents, data_splits;

  void add_common(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--manifest", manifest_path, "rerun with the config recorded in a manifest.json");
    cmd->add_option("--hypothesis", hypothesis, "all | connected | file:<path>");
    cmd->add_option("--goal", goal_vertex, "goal vertex 0..7 for generated sets");
    cmd->add_option("--split-seed", split_seed);
    cmd->add_option("--split-file", split_file, "existing split file (train:/val:/test: lines)");
    cmd->add_option("--seed", seed);
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--jobs", jobs, "worker threads (default: available parallelism)");
  }

  RunConfig resolve() const {
    if (!config_path.empty() && !manifest_path.empty())
      throw ConfigError("use either --config or --manifest, not both");
    RunConfig c;
    if (!config_path.empty()) c = load_config_file(config_path);
    if (!manifest_path.empty()) c = load_config_file(manifest_path);
    if (hypothesis) c.hypothesis = *hypothesis;
    if (goal_vertex) c.goal_vertex = *goal_vertex;
    if (split_seed) c.split_seed = *split_seed;
    if (split_file) c.split_file = *split_file;
    if (seed) c.seed = *seed;
    if (out_dir) c.out_dir = *out_dir;
    if (jobs) c.jobs = *jobs;
    if (eval_split) c.eval_split = *eval_split;
    if (eval_cubes) c.eval_cubes = *eval_cubes;
    if (eval_episodes) c.eval_episodes = *eval_episodes;
    if (episodes_per_cube) c.data_episodes_per_cube = *episodes_per_cube;
    if (external_endpoint) c.external_endpoint = *external_endpoint;
    if (external_timeout_ms) c.external_timeout_ms = *external_timeout_ms;
    if (gamma) c.gamma = *gamma;
    if (!agents.empty()) {
      c.agents.clear();
      for (const auto& a : agents) c.agents.push_back(agent_from_shorthand(a));
    }
    if (!data_splits.empty()) c.data_splits = data_splits;
    validate(c);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior sampling with partial models in simplified symbolic Alchemy"};
  app.require_subcommand(1);

  std::string source = "connected";
  std::string cubes_out;
  int enum_goal = 7;
  auto* enum_cmd = app.add_subcommand("enum-cubes", "write a hypothesis cube set in canonical order");
  enum_cmd->add_option("--source", source, "all | connected | file:<path>")->capture_default_str();
  enum_cmd->add_option("--goal", enum_goal, "goal vertex 0..7")->capture_default_str();
  enum_cmd->add_option("--out", cubes_out, "output cube file")->required();

  Overrides gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate the random-policy training corpus");
  gen.add_common(gen_cmd);
  gen_cmd->add_option("--episodes-per-cube", gen.episodes_per_cube);
  gen_cmd->add_option("--splits", gen.data_splits, "which splits to generate")->delimiter(',');

  Overrides ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate agents on held-out cubes");
  ev.add_common(eval_cmd);
  eval_cmd->add_option("--agents", ev.agents, "exact,uniform,true,random,external,<engine>-mean")->delimiter(',');
  eval_cmd->add_option("--eval-split", ev.eval_split);
  eval_cmd->add_option("--cubes", ev.eval_cubes, "number of cubes from the split (0 = all)");
  eval_cmd->add_option("--episodes", ev.eval_episodes, "episodes per cube");
  eval_cmd->add_option("--gamma", ev.gamma);
  eval_cmd->add_option("--external-endpoint", ev.external_endpoint, "tcp://host:port or exec:<command>");
  eval_cmd->add_option("--external-timeout-ms", ev.external_timeout_ms);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (enum_cmd->parsed()) {
      HypothesisSource src;
      try {
        src = HypothesisSource::parse(source, VertexId(enum_goal));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      if (enum_goal < 0 || enum_goal >= kNumVertices) throw ConfigError("--goal must be in 0..7");
      const std::size_t n = cmd_enum_cubes(src, cubes_out);
      std::cout << "wrote " << n << " cubes to " << cubes_out << "\n";
      return 0;
    }
    if (gen_cmd->parsed()) {
      const RunConfig c = gen.resolve();
      const auto result = cmd_gen_data(c);
      for (const auto& [part, n] : result.records) std::cout << part << ": " << n << " records\n";
      std::cout << "manifest: " << result.manifest.string() << "\n";
      return 0;
    }
    const RunConfig c = ev.resolve();
    const auto result = cmd_eval(c);
    for (const auto& a : result.agents) {
      if (a.ok)
        std::cout << a.name << ": " << a.runs.size() << " episodes\n";
      else
        std::cerr << a.name << ": FAILED: " << a.error << "\n";
    }
    std::cout << "metrics: " << result.metrics_csv.string() << "\naggregate: " << result.aggregate_csv.string()
              << "\nmanifest: " << result.manifest.string() << "\n";
    return result.external_failed() ? kExitExternal : 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CubeFileError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ProtocolError& e) {
    std::cerr << "external engine error: " << e.what() << "\n";
    return kExitExternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
