#ifndef GAILDRIVE_EXPERT_PID_HPP_
#define GAILDRIVE_EXPERT_PID_HPP_

#include "gaildrive/sim/route.hpp"
#include "gaildrive/sim/types.hpp"

namespace gaildrive::expert {

struct PidParams {
  // Steering: cross-track error in meters (positive when left of the path)
  // and bearing to the lookahead point in radians.
  double kp = 0.3;
  double ki = 0.0;
  double kd = 0.2;
  double k_heading = 1.5;
  double lookahead = 4.0;  // m along the route
  // Speed loop.
  double target_speed = 5.0;  // m/s
  double turn_speed = 2.5;    // m/s while the command is LEFT or RIGHT
  double speed_kp = 0.5;
  double speed_ki = 0.05;
  double hold_throttle_per_mps = 0.1;  // drag / max_accel: throttle that holds a speed
  double dt = 0.1;

  // Throws ConfigError on non-finite gains or bad speeds.
  void validate() const;
};

// Point on the route `s` meters from the start; past the end the last
// segment is extended.
sim::Vec2 point_at_arclength(const sim::RouteSpec& route, double s);

class PidExpert {
 public:
  explicit PidExpert(PidParams params = {});

  // Clears the integrators; call at the start of every episode.
  void reset();
  sim::Action act(const sim::VehicleState& s, const sim::RouteSpec& route, sim::Command command);
  const PidParams& params() const { return params_; }

 private:
  PidParams params_;
  double ct_integral_ = 0.0;
  double ct_prev_ = 0.0;
  bool has_prev_ = false;
  double speed_integral_ = 0.0;
};

}  // namespace gaildrive::expert

#endif  // GAILDRIVE_EXPERT_PID_HPP_
