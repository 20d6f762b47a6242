#include "gaildrive/expert/collect.hpp"

#include "gaildrive/common/error.hpp"

namespace gaildrive::expert {

namespace {

// Runs one lap; calls record(obs, action) before every step.
template <typename Record>
std::size_t drive_lap(sim::Environment& env, PidExpert& pid, std::size_t max_steps, Record record) {
  auto obs = env.reset_to_start();
  pid.reset();
  for (std::size_t step = 0; step < max_steps; ++step) {
    const auto action = pid.act(env.state(), env.route(), env.command());
    record(obs, action);
    const auto r = env.step(action);
    if (r.infraction) {
      throw CollectionError("expert committed " + std::string(sim::to_string(*r.infraction)) +
                            " after " + std::to_string(r.dense_crossed_total) +
                            " dense points; retune the PID gains");
    }
    if (r.route_complete) return step + 1;
    obs = r.observation;
  }
  throw CollectionError("expert did not finish the route within " + std::to_string(max_steps) + " steps");
}

}  // namespace

Dataset collect(const sim::RouteSpec& route, const PidParams& params,
                const sim::EnvConfig& env_config, const CollectOptions& options) {
  DatasetManifest m;
  m.route = std::string(sim::to_string(route.kind));
  m.raster = env_config.raster;
  m.rate_hz = 1.0 / env_config.vehicle.dt;
  Dataset d(m);
  sim::Environment env(route, env_config);
  PidExpert pid(params);
  for (std::size_t t = 0; t < options.trajectories; ++t) {
    drive_lap(env, pid, options.max_steps_per_lap,
              [&](const sim::Observation& o, const sim::Action& a) { d.add(o, a); });
    d.end_trajectory();
  }
  return d;
}

std::size_t expert_lap_steps(const sim::RouteSpec& route, const PidParams& params,
                             const sim::EnvConfig& env_config) {
  sim::EnvConfig cfg = env_config;
  cfg.raster = false;
  sim::Environment env(route, cfg);
  PidExpert pid(params);
  return drive_lap(env, pid, 20000, [](const sim::Observation&, const sim::Action&) {});
}

}  // namespace gaildrive::expert
