#include "gaildrive/train/config.hpp"

#include <set>

#include "gaildrive/common/error.hpp"

namespace gaildrive::train {

using nlohmann::json;

std::string_view to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kBc: return "bc";
    case TrainMode::kGail: return "gail";
    case TrainMode::kBcGail: return "bc_gail";
  }
  return "?";
}

std::optional<TrainMode> parse_train_mode(std::string_view s) {
  if (s == "bc") return TrainMode::kBc;
  if (s == "gail") return TrainMode::kGail;
  if (s == "bc_gail") return TrainMode::kBcGail;
  return std::nullopt;
}

sim::RouteSpec RouteConfig::build() const {
  if (kind == sim::RouteKind::kCustom) return sim::build_route(sim::custom_layout(length, turns, dense, sparse));
  return sim::make_route(kind, seed);
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (n_envs == 0 || steps_per_actor == 0) fail("n_envs and steps_per_actor must be positive");
  if (minibatch == 0 || timesteps_per_update() % minibatch != 0) {
    fail("minibatch (" + std::to_string(minibatch) + ") must divide T = " +
         std::to_string(timesteps_per_update()));
  }
  if (!(alpha0 >= 0.0 && alpha0 <= 1.0)) fail("alpha0 must be in [0, 1]");
  if (!(alpha_decay > 0.0 && alpha_decay <= 1.0)) fail("alpha_decay must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    fail("gamma and gae_lambda must be in [0, 1]");
  }
  if (!(clip > 0.0)) fail("clip must be positive");
  if (!(lr > 0.0) || !(disc_lr > 0.0) || !(bc_lr > 0.0)) fail("learning rates must be positive");
  if (!(gp_eps > 0.0)) fail("gp_eps must be positive");
  if (bc_batch == 0) fail("bc_batch must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must be in (0, 1)");
  if (threads == 0) fail("threads must be >= 1");
  if (eval_every == 0) fail("eval_every must be >= 1");
  if (env.raster != (obs_mode == agent::ObsMode::kRaster)) fail("env.raster must match obs_mode");
}

TrainConfig defaults_for(sim::RouteKind kind) {
  TrainConfig c;
  c.route.kind = kind;
  if (kind == sim::RouteKind::kLong) {
    c.steps_per_actor = 720;
    c.minibatch = 900;
  }
  return c;
}

json to_json(const TrainConfig& c) {
  json j;
  j["mode"] = std::string(to_string(c.mode));
  j["route"] = {{"kind", std::string(sim::to_string(c.route.kind))}, {"seed", c.route.seed},
                {"length", c.route.length}, {"turns", c.route.turns},
                {"dense", c.route.dense}, {"sparse", c.route.sparse}};
  j["obs_mode"] = std::string(agent::to_string(c.obs_mode));
  j["scaling"] = {{"speed", c.scaling.speed}, {"target", c.scaling.target}};
  j["seed"] = c.seed;
  j["n_envs"] = c.n_envs;
  j["steps_per_actor"] = c.steps_per_actor;
  j["lr"] = c.lr;
  j["ppo_epochs"] = c.ppo_epochs;
  j["minibatch"] = c.minibatch;
  j["gamma"] = c.gamma;
  j["gae_lambda"] = c.gae_lambda;
  j["clip"] = c.clip;
  j["value_coef"] = c.value_coef;
  j["entropy_coef"] = c.entropy_coef;
  j["log_std"] = c.log_std;
  j["max_grad_norm"] = c.max_grad_norm;
  j["disc_lr"] = c.disc_lr;
  j["gp_coef"] = c.gp_coef;
  j["gp_eps"] = c.gp_eps;
  j["gp_direction"] = std::string(agent::to_string(c.gp_direction));
  j["reward_transform"] = std::string(to_string(c.reward_transform));
  j["alpha0"] = c.alpha0;
  j["alpha_decay"] = c.alpha_decay;
  j["total_updates"] = c.total_updates;
  j["bc_lr"] = c.bc_lr;
  j["bc_epochs"] = c.bc_epochs;
  j["bc_batch"] = c.bc_batch;
  j["train_fraction"] = c.train_fraction;
  j["eval_every"] = c.eval_every;
  j["eval_det_episodes"] = c.eval_det_episodes;
  j["eval_stoch_episodes"] = c.eval_stoch_episodes;
  j["eval_step_cap"] = c.eval_step_cap;
  j["checkpoint_every"] = c.checkpoint_every;
  j["threads"] = c.threads;
  j["record_wall_clock"] = c.record_wall_clock;
  j["stop_at_fraction"] = c.stop_at_fraction;
  j["env"] = {{"restart_at_infraction_prob", c.env.restart_at_infraction_prob},
              {"stall_steps", c.env.stall_steps},
              {"stall_speed", c.env.stall_speed}};
  return j;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError("unknown config key '" + where + k + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

TrainConfig from_json(const json& j, TrainConfig c) {
  reject_unknown(j,
                 {"mode", "route", "obs_mode", "scaling", "seed", "n_envs", "steps_per_actor", "lr",
                  "ppo_epochs", "minibatch", "gamma", "gae_lambda", "clip", "value_coef", "entropy_coef",
                  "log_std", "max_grad_norm", "disc_lr", "gp_coef", "gp_eps", "gp_direction", "reward_transform", "alpha0",
                  "alpha_decay", "total_updates", "bc_lr", "bc_epochs", "bc_batch", "train_fraction",
                  "eval_every", "eval_det_episodes", "eval_stoch_episodes", "eval_step_cap",
                  "checkpoint_every", "threads", "record_wall_clock", "stop_at_fraction", "env"},
                 "");
  if (j.contains("mode")) {
    auto m = parse_train_mode(j["mode"].get<std::string>());
    if (!m) throw ConfigError("unknown mode " + j["mode"].dump());
    c.mode = *m;
  }
  if (j.contains("route")) {
    const auto& r = j["route"];
    reject_unknown(r, {"kind", "seed", "length", "turns", "dense", "sparse"}, "route.");
    if (r.contains("kind")) {
      auto k = sim::parse_route_kind(r["kind"].get<std::string>());
      if (!k) throw ConfigError("unknown route kind " + r["kind"].dump());
      c.route.kind = *k;
    }
    take(r, "seed", c.route.seed);
    take(r, "length", c.route.length);
    take(r, "turns", c.route.turns);
    take(r, "dense", c.route.dense);
    take(r, "sparse", c.route.sparse);
  }
  if (j.contains("obs_mode")) {
    auto m = agent::parse_obs_mode(j["obs_mode"].get<std::string>());
    if (!m) throw ConfigError("unknown obs_mode " + j["obs_mode"].dump());
    c.obs_mode = *m;
  }
  if (j.contains("scaling")) {
    reject_unknown(j["scaling"], {"speed", "target"}, "scaling.");
    take(j["scaling"], "speed", c.scaling.speed);
    take(j["scaling"], "target", c.scaling.target);
  }
  take(j, "seed", c.seed);
  take(j, "n_envs", c.n_envs);
  take(j, "steps_per_actor", c.steps_per_actor);
  take(j, "lr", c.lr);
  take(j, "ppo_epochs", c.ppo_epochs);
  take(j, "minibatch", c.minibatch);
  take(j, "gamma", c.gamma);
  take(j, "gae_lambda", c.gae_lambda);
  take(j, "clip", c.clip);
  take(j, "value_coef", c.value_coef);
  take(j, "entropy_coef", c.entropy_coef);
  take(j, "log_std", c.log_std);
  take(j, "max_grad_norm", c.max_grad_norm);
  take(j, "disc_lr", c.disc_lr);
  take(j, "gp_coef", c.gp_coef);
  take(j, "gp_eps", c.gp_eps);
  if (j.contains("gp_direction")) {
    auto g = agent::parse_gp_direction(j["gp_direction"].get<std::string>());
    if (!g) throw ConfigError("unknown gp_direction " + j["gp_direction"].dump());
    c.gp_direction = *g;
  }
  if (j.contains("reward_transform")) {
    auto t = parse_reward_transform(j["reward_transform"].get<std::string>());
    if (!t) throw ConfigError("unknown reward_transform " + j["reward_transform"].dump());
    c.reward_transform = *t;
  }
  take(j, "alpha0", c.alpha0);
  take(j, "alpha_decay", c.alpha_decay);
  take(j, "total_updates", c.total_updates);
  take(j, "bc_lr", c.bc_lr);
  take(j, "bc_epochs", c.bc_epochs);
  take(j, "bc_batch", c.bc_batch);
  take(j, "train_fraction", c.train_fraction);
  take(j, "eval_every", c.eval_every);
  take(j, "eval_det_episodes", c.eval_det_episodes);
  take(j, "eval_stoch_episodes", c.eval_stoch_episodes);
  take(j, "eval_step_cap", c.eval_step_cap);
  take(j, "checkpoint_every", c.checkpoint_every);
  take(j, "threads", c.threads);
  take(j, "record_wall_clock", c.record_wall_clock);
  take(j, "stop_at_fraction", c.stop_at_fraction);
  if (j.contains("env")) {
    const auto& e = j["env"];
    reject_unknown(e, {"restart_at_infraction_prob", "stall_steps", "stall_speed"}, "env.");
    take(e, "restart_at_infraction_prob", c.env.restart_at_infraction_prob);
    take(e, "stall_steps", c.env.stall_steps);
    take(e, "stall_speed", c.env.stall_speed);
  }
  c.env.raster = c.obs_mode == agent::ObsMode::kRaster;
  return c;
}

}  // namespace gaildrive::train
