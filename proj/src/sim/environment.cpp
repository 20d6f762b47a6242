#include "gaildrive/sim/environment.hpp"

#include <algorithm>
#include <cmath>

#include "gaildrive/common/error.hpp"

namespace gaildrive::sim {

Vec2 to_car_frame(const VehicleState& s, Vec2 world) {
  const Vec2 d = world - s.position();
  const double c = std::cos(s.heading), sn = std::sin(s.heading);
  return {c * d.x + sn * d.y, -sn * d.x + c * d.y};
}

PlanResult plan(const RouteSpec& route, const VehicleState& s, std::size_t progress) {
  std::size_t idx = std::min(progress, route.sparse_points.size() - 1);
  while (idx + 1 < route.sparse_points.size() &&
         norm(route.sparse_points[idx] - s.position()) <= route.crossing_radius) {
    ++idx;
  }
  return {to_car_frame(s, route.sparse_points[idx]), route.commands[idx], idx};
}

std::optional<InfractionKind> detect_lane_invasion(const VehicleState& s, const RouteSpec& route) {
  if (project(route, s.position()).distance > route.lane_half_width) {
    return InfractionKind::kLaneInvasion;
  }
  return std::nullopt;
}

Environment::Environment(RouteSpec route, EnvConfig config)
    : route_(std::move(route)), config_(config) {
  if (route_.dense_points.size() < 2 || route_.sparse_points.empty() ||
      route_.commands.size() != route_.sparse_points.size()) {
    throw ConfigError("environment needs a route with dense points, sparse points and commands");
  }
  if (route_.sparse_dense_index.size() != route_.sparse_points.size()) {
    // Routes read back from a dump carry no index table; rebuild it.
    route_.sparse_dense_index.clear();
    for (const auto& sp : route_.sparse_points) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < route_.dense_points.size(); ++i) {
        if (norm(route_.dense_points[i] - sp) < norm(route_.dense_points[best] - sp)) best = i;
      }
      route_.sparse_dense_index.push_back(best);
    }
  }
  if (route_.dense_arclength.size() != route_.dense_points.size()) {
    route_.dense_arclength.assign(1, 0.0);
    for (std::size_t i = 1; i < route_.dense_points.size(); ++i) {
      route_.dense_arclength.push_back(route_.dense_arclength.back() +
                                       norm(route_.dense_points[i] - route_.dense_points[i - 1]));
    }
  }
}

Observation Environment::reset(Rng& rng) {
  const double u = uniform01(rng);
  std::uniform_int_distribution<std::size_t> pick(0, route_.dense_points.size() - 1);
  return reset_with(u, pick(rng));
}

Observation Environment::reset_with(double u, std::size_t random_index) {
  if (!started_ || !infraction_index_) return reset_to_start();
  if (u < config_.restart_at_infraction_prob) return reset_at(*infraction_index_);
  return reset_at(random_index);
}

Observation Environment::reset_to_start() { return reset_at(0); }

Observation Environment::reset_at(std::size_t index) {
  if (index >= route_.dense_points.size()) throw ConfigError("restart index out of range");
  const Vec2 p = route_.dense_points[index];
  const Vec2 t = route_.tangent(index);
  state_ = {p.x, p.y, std::atan2(t.y, t.x), 0.0};
  crossed_ = index;
  const auto& sdi = route_.sparse_dense_index;
  sparse_index_ = static_cast<std::size_t>(
      std::upper_bound(sdi.begin(), sdi.end(), index) - sdi.begin());
  sparse_index_ = std::min(sparse_index_, sdi.size() - 1);
  stalled_ = 0;
  started_ = true;
  terminal_ = false;
  infraction_index_.reset();
  return observe();
}

void Environment::update_crossings() {
  const Vec2 car = state_.position();
  while (crossed_ < route_.dense_points.size()) {
    const Vec2 d = car - route_.dense_points[crossed_];
    if (norm(d) > route_.crossing_radius || dot(d, route_.tangent(crossed_)) <= 0.0) break;
    ++crossed_;
  }
}

StepResult Environment::step(const Action& action) {
  if (!started_) throw StateError("step() before reset()");
  if (terminal_) throw StateError("step() on a terminal environment; call reset()");
  state_ = step_dynamics(state_, action.clamped(), config_.vehicle);
  update_crossings();
  sparse_index_ = plan(route_, state_, sparse_index_).index;
  stalled_ = state_.speed < config_.stall_speed ? stalled_ + 1 : 0;

  StepResult r;
  r.infraction = detect_lane_invasion(state_, route_);
  if (!r.infraction && stalled_ >= config_.stall_steps) r.infraction = InfractionKind::kStagnation;
  r.route_complete = !r.infraction && crossed_ == route_.dense_points.size();
  r.dense_crossed_total = crossed_;
  if (r.infraction) {
    infraction_index_ = project(route_, state_.position()).segment;
  }
  terminal_ = r.done();
  r.observation = observe();
  return r;
}

Observation Environment::observe() const {
  Observation o;
  o.speed = state_.speed;
  o.target = to_car_frame(state_, route_.sparse_points[sparse_index_]);
  o.command_onehot = encode_command(route_.commands[sparse_index_]);
  if (config_.raster) o.raster = render_raster(state_, route_, config_.raster_config);
  return o;
}

}  // namespace gaildrive::sim
