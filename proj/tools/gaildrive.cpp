// gaildrive: collect expert data, train BC / GAIL / BC-GAIL, evaluate, dump routes.
//
// Exit codes: 0 success, 1 expert collection failure, 2 usage or config
// error, 3 numeric failure during training.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaildrive/agent/networks.hpp"
#include "gaildrive/common/bytes.hpp"
#include "gaildrive/common/error.hpp"
#include "gaildrive/eval/evaluate.hpp"
#include "gaildrive/expert/collect.hpp"
#include "gaildrive/expert/dataset.hpp"
#include "gaildrive/nn/checkpoint.hpp"
#include "gaildrive/train/config.hpp"
#include "gaildrive/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace gaildrive;
using nlohmann::json;

namespace {

constexpr int kUsage = 2;
constexpr int kNumeric = 3;
constexpr int kCollection = 1;

std::uint64_t default_seed() {
  if (const char* s = std::getenv("GDRV_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigError(std::string("GDRV_SEED is not an integer: ") + s);
    }
  }
  return 1;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

sim::RouteKind route_kind(const std::string& name) {
  auto k = sim::parse_route_kind(name);
  if (!k) throw ConfigError("unknown route '" + name + "' (short, long, custom)");
  return *k;
}

agent::ObsMode obs_mode(const std::string& name) {
  auto m = agent::parse_obs_mode(name);
  if (!m) throw ConfigError("unknown obs mode '" + name + "' (vector, raster)");
  return *m;
}

// Options shared by every subcommand that builds a route or a TrainConfig.
struct Common {
  std::string config_path;
  std::optional<std::string> route;
  std::optional<std::uint64_t> route_seed;
  std::optional<double> route_length;
  std::optional<std::size_t> route_turns;
  std::optional<std::string> obs;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file (flags win over its values)");
    app->add_option("--route", route, "short, long or custom");
    app->add_option("--route-seed", route_seed, "jitters the straight lengths of short/long routes");
    app->add_option("--route-length", route_length, "custom route length in meters");
    app->add_option("--route-turns", route_turns, "custom route turn count");
    app->add_option("--obs-mode", obs, "vector or raster");
    app->add_option("--seed", seed, "run seed (default: $GDRV_SEED or 1)");
  }

  // File keys outside the TrainConfig schema.
  json paths;

  train::TrainConfig resolve() {
    json file = config_path.empty() ? json::object() : read_json_file(config_path);
    if (!file.is_object()) throw ConfigError("config must be a JSON object");
    if (file.contains("paths")) {
      paths = file["paths"];
      file.erase("paths");
      if (!paths.is_object()) throw ConfigError("paths must be an object");
      for (const auto& [k, v] : paths.items()) {
        if (k != "dataset" && k != "run_dir" && k != "name") throw ConfigError("unknown config key 'paths." + k + "'");
      }
    }
    sim::RouteKind kind = sim::RouteKind::kShort;
    if (file.contains("route") && file["route"].contains("kind")) kind = route_kind(file["route"]["kind"]);
    if (route) kind = route_kind(*route);
    train::TrainConfig c = train::from_json(file, train::defaults_for(kind));
    c.seed = file.contains("seed") ? c.seed : default_seed();
    c.route.kind = kind;
    if (route_seed) c.route.seed = *route_seed;
    if (route_length) c.route.length = *route_length;
    if (route_turns) c.route.turns = *route_turns;
    if (obs) c.obs_mode = obs_mode(*obs);
    if (seed) c.seed = *seed;
    c.env.raster = c.obs_mode == agent::ObsMode::kRaster;
    return c;
  }

  std::string path_or(const char* key, const std::string& fallback) const {
    return paths.contains(key) ? paths[key].get<std::string>() : fallback;
  }
};

int cmd_collect(Common& common, std::size_t trajectories, const std::string& out) {
  const auto cfg = common.resolve();
  const auto route = cfg.route.build();
  const auto d = expert::collect(route, {}, cfg.env, {.trajectories = trajectories});
  expert::write_dataset(out, d);
  std::cout << "collected " << d.size() << " samples in " << d.trajectories() << " trajectories -> " << out << "\n";
  return 0;
}

struct TrainFlags {
  std::optional<std::string> mode;
  std::optional<std::string> dataset;
  std::optional<std::string> run_dir;
  std::optional<std::string> name;
  std::optional<std::size_t> updates, epochs, n_envs, steps_per_actor, minibatch, eval_every, threads;
  std::optional<double> lr, bc_lr, disc_lr, alpha0, alpha_decay, gp_coef, stop_at;
  std::optional<std::string> gp_direction;
  bool wall_clock = false;
};

int cmd_train(Common& common, const TrainFlags& f) {
  train::TrainConfig cfg = common.resolve();
  if (f.mode) {
    auto m = train::parse_train_mode(*f.mode);
    if (!m) throw ConfigError("unknown mode '" + *f.mode + "' (bc, gail, bc_gail)");
    cfg.mode = *m;
  }
  if (cfg.mode == train::TrainMode::kBc) {
    const bool gail_flags = f.updates || f.n_envs || f.steps_per_actor || f.minibatch || f.lr || f.disc_lr ||
                            f.alpha0 || f.alpha_decay || f.gp_coef || f.gp_direction;
    if (gail_flags) std::cerr << "warning: --mode bc ignores GAIL-only flags\n";
  }
  if (f.updates) cfg.total_updates = *f.updates;
  if (f.epochs) cfg.bc_epochs = *f.epochs;
  if (f.n_envs) cfg.n_envs = *f.n_envs;
  if (f.steps_per_actor) cfg.steps_per_actor = *f.steps_per_actor;
  if (f.minibatch) cfg.minibatch = *f.minibatch;
  if (f.eval_every) cfg.eval_every = *f.eval_every;
  if (f.threads) cfg.threads = *f.threads;
  if (f.lr) cfg.lr = *f.lr;
  if (f.bc_lr) cfg.bc_lr = *f.bc_lr;
  if (f.disc_lr) cfg.disc_lr = *f.disc_lr;
  if (f.alpha0) cfg.alpha0 = *f.alpha0;
  if (f.alpha_decay) cfg.alpha_decay = *f.alpha_decay;
  if (f.gp_coef) cfg.gp_coef = *f.gp_coef;
  if (f.stop_at) cfg.stop_at_fraction = *f.stop_at;
  if (f.gp_direction) {
    auto g = agent::parse_gp_direction(*f.gp_direction);
    if (!g) throw ConfigError("unknown --gp-direction '" + *f.gp_direction + "' (interpolation, gradient)");
    cfg.gp_direction = *g;
  }
  if (f.wall_clock) cfg.record_wall_clock = true;
  cfg.validate();

  const std::string dataset_path = f.dataset.value_or(common.path_or("dataset", ""));
  if (dataset_path.empty()) throw ConfigError("--dataset is required");
  if (!fs::exists(dataset_path)) throw ConfigError("dataset not found: " + dataset_path);
  const auto dataset = expert::read_dataset(dataset_path);

  const std::string name =
      f.name.value_or(common.path_or("name", std::string(train::to_string(cfg.mode)) + "_" +
                                                 std::string(sim::to_string(cfg.route.kind)) + "_seed" +
                                                 std::to_string(cfg.seed)));
  const fs::path dir = fs::path(f.run_dir.value_or(common.path_or("run_dir", "runs"))) / name;
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "trajectories");
  {
    json echo = train::to_json(cfg);
    echo["paths"] = {{"dataset", dataset_path}, {"run_dir", dir.parent_path().string()}, {"name", name}};
    std::ofstream(dir / "config.json") << echo.dump(2) << "\n";
  }

  train::RunPaths paths{(dir / "metrics.csv").string(), (dir / "checkpoints").string(), dir.string()};
  const auto result = train::train(cfg, dataset, paths, [](const train::MetricsRow& r) {
    std::cerr << "update " << r.update << " steps " << r.env_steps << " det "
              << (r.eval_reward_det ? std::to_string(*r.eval_reward_det) : "-") << " stoch "
              << (r.eval_reward_stoch ? std::to_string(*r.eval_reward_stoch) : "-") << "\n";
    return true;
  });

  // Trajectory of the final policy for plotting.
  const auto route = cfg.route.build();
  eval::PolicyDriver driver(result.policy, agent::InputEncoder(cfg.obs_mode, cfg.scaling), cfg.log_std,
                            eval::EvalMode::kDeterministic);
  Rng rng = make_rng(cfg.seed, 0);
  const auto report = eval::evaluate(driver, route, cfg.env,
                                     {.episodes = 1, .max_steps = eval::default_step_cap(route, cfg.env),
                                      .record_traces = true},
                                     eval::EvalMode::kDeterministic, rng);
  eval::dump_trajectory(report, (dir / "trajectories" / "final_det.txt").string());
  std::cout << "run " << dir.string() << ": " << result.metrics.size() << " rows, final deterministic reward "
            << report.mean() << "/" << route.dense_points.size() << "\n";
  return 0;
}

int cmd_eval(Common& common, const std::optional<std::string>& checkpoint, bool use_expert, std::size_t episodes,
             const std::string& mode_name, const std::optional<std::string>& dump) {
  const auto cfg = common.resolve();
  auto mode = eval::parse_eval_mode(mode_name);
  if (!mode) throw ConfigError("unknown eval mode '" + mode_name + "' (stochastic, deterministic)");
  if (use_expert == checkpoint.has_value()) throw ConfigError("give exactly one of --checkpoint or --expert");
  const auto route = cfg.route.build();

  std::unique_ptr<eval::Driver> driver;
  nn::Network policy;
  std::size_t cap = 0;
  if (use_expert) {
    driver = std::make_unique<eval::ExpertDriver>();
  } else {
    if (!fs::exists(*checkpoint)) throw ConfigError("checkpoint not found: " + *checkpoint);
    const auto bytes = read_file(*checkpoint);
    const auto tables = nn::read_layer_tables(bytes);
    if (tables.empty() || tables[0] != agent::actor_critic_layers(cfg.obs_mode)) {
      throw ConfigError("checkpoint does not hold a " + std::string(agent::to_string(cfg.obs_mode)) +
                        " actor-critic");
    }
    std::vector<nn::Network> nets;
    for (const auto& t : tables) nets.emplace_back(t);
    std::vector<nn::Network*> ptrs;
    for (auto& n : nets) ptrs.push_back(&n);
    nn::load_params(ptrs, bytes);
    policy = std::move(nets[0]);
    driver = std::make_unique<eval::PolicyDriver>(policy, agent::InputEncoder(cfg.obs_mode, cfg.scaling),
                                                  cfg.log_std, *mode);
    cap = eval::default_step_cap(route, cfg.env);
  }
  Rng rng = make_rng(cfg.seed, 0x6576616c);
  const auto report =
      eval::evaluate(*driver, route, cfg.env, {.episodes = episodes, .max_steps = cap, .record_traces = dump.has_value()},
                     *mode, rng);
  std::cout << "mode=" << eval::to_string(*mode) << " episodes=" << report.episodes();
  if (report.episodes() > 0) {
    std::cout << " mean=" << report.mean() << " std=" << report.stddev() << " max=" << report.max()
              << " min=" << report.min();
  }
  std::cout << " of " << route.dense_points.size() << "\n";
  if (dump) eval::dump_trajectory(report, *dump);
  return 0;
}

int cmd_routes(Common& common, const std::optional<std::string>& out) {
  const auto route = common.resolve().route.build();
  if (out) {
    std::ofstream f(*out);
    if (!f) throw Error("cannot write " + *out);
    sim::write_route_dump(route, f);
  } else {
    sim::write_route_dump(route, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaildrive: imitation learning for a 2D driving simulator"};
  app.require_subcommand(1);

  Common collect_common, train_common, eval_common, routes_common;

  auto* collect = app.add_subcommand("collect", "record expert trajectories");
  collect_common.add(collect);
  std::size_t trajectories = 10;
  std::string collect_out;
  collect->add_option("--trajectories", trajectories, "expert laps to record")->capture_default_str();
  collect->add_option("--out", collect_out, "dataset file")->required();

  auto* train_cmd = app.add_subcommand("train", "train a policy (bc, gail, bc_gail)");
  train_common.add(train_cmd);
  TrainFlags tf;
  train_cmd->add_option("--mode", tf.mode, "bc, gail or bc_gail");
  train_cmd->add_option("--dataset", tf.dataset, "expert dataset file");
  train_cmd->add_option("--run-dir", tf.run_dir, "parent of the run directory (default runs)");
  train_cmd->add_option("--name", tf.name, "run directory name");
  train_cmd->add_option("--updates", tf.updates, "GAIL policy updates");
  train_cmd->add_option("--epochs", tf.epochs, "BC epochs");
  train_cmd->add_option("--n-envs", tf.n_envs);
  train_cmd->add_option("--steps-per-actor", tf.steps_per_actor);
  train_cmd->add_option("--minibatch", tf.minibatch);
  train_cmd->add_option("--eval-every", tf.eval_every);
  train_cmd->add_option("--threads", tf.threads);
  train_cmd->add_option("--lr", tf.lr);
  train_cmd->add_option("--bc-lr", tf.bc_lr);
  train_cmd->add_option("--disc-lr", tf.disc_lr);
  train_cmd->add_option("--alpha0", tf.alpha0);
  train_cmd->add_option("--alpha-decay", tf.alpha_decay);
  train_cmd->add_option("--gp-coef", tf.gp_coef);
  train_cmd->add_option("--gp-direction", tf.gp_direction, "penalty slope direction: interpolation or gradient");
  train_cmd->add_option("--stop-at", tf.stop_at, "stop once deterministic eval reaches this fraction of max");
  train_cmd->add_flag("--wall-clock", tf.wall_clock, "record wall-clock seconds (breaks bitwise reproducibility)");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint or the expert");
  eval_common.add(eval_cmd);
  std::optional<std::string> checkpoint, dump;
  bool use_expert = false;
  std::size_t episodes = 1;
  std::string eval_mode = "deterministic";
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file (policy first)");
  eval_cmd->add_flag("--expert", use_expert, "evaluate the PID expert instead");
  eval_cmd->add_option("--episodes", episodes)->capture_default_str();
  eval_cmd->add_option("--mode", eval_mode, "stochastic or deterministic")->capture_default_str();
  eval_cmd->add_option("--dump", dump, "write trajectories to this file");

  auto* routes = app.add_subcommand("routes", "dump route geometry");
  routes_common.add(routes);
  std::optional<std::string> routes_out;
  routes->add_option("--out", routes_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*collect) return cmd_collect(collect_common, trajectories, collect_out);
    if (*train_cmd) return cmd_train(train_common, tf);
    if (*eval_cmd) return cmd_eval(eval_common, checkpoint, use_expert, episodes, eval_mode, dump);
    if (*routes) return cmd_routes(routes_common, routes_out);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const CollectionError& e) {
    std::cerr << "expert failed: " << e.what() << "\n";
    return kCollection;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
