#include "gaildrive/sim/dynamics.hpp"

#include <algorithm>
#include <numbers>

namespace gaildrive::sim {

VehicleState step_dynamics(const VehicleState& s, const Action& a, const VehicleParams& p) {
  const double delta = p.max_steer_deg * std::numbers::pi / 180.0 * a.steer;
  VehicleState n;
  n.x = s.x + s.speed * std::cos(s.heading) * p.dt;
  n.y = s.y + s.speed * std::sin(s.heading) * p.dt;
  n.heading = wrap_angle(s.heading + s.speed / p.wheelbase * std::tan(delta) * p.dt);
  n.speed = std::max(0.0, s.speed + (p.max_accel * a.throttle - p.drag * s.speed) * p.dt);
  return n;
}

}  // namespace gaildrive::sim
