#ifndef GAILDRIVE_SIM_DYNAMICS_HPP_
#define GAILDRIVE_SIM_DYNAMICS_HPP_

#include "gaildrive/sim/types.hpp"

namespace gaildrive::sim {

struct VehicleParams {
  double wheelbase = 2.5;         // m
  double max_steer_deg = 35.0;    // front wheel angle at steer = 1
  double max_accel = 3.0;         // m/s^2 at throttle = 1
  double drag = 0.3;              // 1/s
  double dt = 0.1;                // s
};

// Kinematic bicycle update. The action is used as given; callers clamp it.
VehicleState step_dynamics(const VehicleState& s, const Action& a, const VehicleParams& p);

}  // namespace gaildrive::sim

#endif  // GAILDRIVE_SIM_DYNAMICS_HPP_
