#ifndef GAILDRIVE_SIM_ENVIRONMENT_HPP_
#define GAILDRIVE_SIM_ENVIRONMENT_HPP_

#include <cstddef>
#include <optional>

#include "gaildrive/common/random.hpp"
#include "gaildrive/sim/dynamics.hpp"
#include "gaildrive/sim/raster.hpp"
#include "gaildrive/sim/route.hpp"
#include "gaildrive/sim/types.hpp"

namespace gaildrive::sim {

struct EnvConfig {
  VehicleParams vehicle;
  bool raster = false;
  RasterConfig raster_config;
  double restart_at_infraction_prob = 0.9;
  int stall_steps = 50;
  double stall_speed = 0.1;  // m/s
};

struct StepResult {
  Observation observation;
  std::optional<InfractionKind> infraction;
  bool route_complete = false;
  std::size_t dense_crossed_total = 0;

  bool done() const { return infraction.has_value() || route_complete; }
};

struct PlanResult {
  Vec2 target;  // car frame
  Command command = Command::kLaneFollow;
  std::size_t index = 0;
};

// Moves past every sparse point the car is within crossing_radius of (the
// last one is never passed) and expresses the current one in the car frame.
PlanResult plan(const RouteSpec& route, const VehicleState& s, std::size_t progress);

// World point in the car frame: x forward, y to the right.
Vec2 to_car_frame(const VehicleState& s, Vec2 world);

// Lane invasion only; stagnation needs the step history and lives in Environment.
std::optional<InfractionKind> detect_lane_invasion(const VehicleState& s, const RouteSpec& route);

class Environment {
 public:
  explicit Environment(RouteSpec route, EnvConfig config = {});

  // Picks the start point from the previous episode's outcome: the route
  // start on the first reset or after completion, otherwise the infraction
  // point (probability restart_at_infraction_prob) or a uniform dense point.
  Observation reset(Rng& rng);
  // Same decision with the draws supplied: u in [0, 1) selects the branch,
  // random_index is used by the uniform branch.
  Observation reset_with(double u, std::size_t random_index);
  Observation reset_to_start();
  // Places the car on dense point `index`, heading along the route, at rest.
  Observation reset_at(std::size_t index);

  StepResult step(const Action& action);

  const RouteSpec& route() const { return route_; }
  const EnvConfig& config() const { return config_; }
  const VehicleState& state() const { return state_; }
  bool terminal() const { return terminal_; }
  std::size_t sparse_index() const { return sparse_index_; }
  std::size_t crossed() const { return crossed_; }
  Command command() const { return route_.commands[sparse_index_]; }
  // Dense index a restart after the last infraction would use.
  std::optional<std::size_t> infraction_index() const { return infraction_index_; }
  Observation observe() const;

 private:
  void update_crossings();

  RouteSpec route_;
  EnvConfig config_;
  VehicleState state_;
  std::size_t crossed_ = 0;
  std::size_t sparse_index_ = 0;
  int stalled_ = 0;
  bool started_ = false;
  bool terminal_ = false;
  std::optional<std::size_t> infraction_index_;
};

}  // namespace gaildrive::sim

#endif  // GAILDRIVE_SIM_ENVIRONMENT_HPP_
