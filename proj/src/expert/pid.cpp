#include "gaildrive/expert/pid.hpp"

#include <algorithm>
#include <cmath>

#include "gaildrive/common/error.hpp"

namespace gaildrive::expert {

using sim::Vec2;

void PidParams::validate() const {
  for (double g : {kp, ki, kd, k_heading, lookahead, speed_kp, speed_ki, hold_throttle_per_mps, dt}) {
    if (!std::isfinite(g)) throw ConfigError("PID gains must be finite");
  }
  if (!(turn_speed > 0.0) || !(turn_speed <= target_speed)) {
    throw ConfigError("PID speeds need 0 < turn_speed <= target_speed");
  }
  if (!(dt > 0.0)) throw ConfigError("PID dt must be positive");
}

Vec2 point_at_arclength(const sim::RouteSpec& route, double s) {
  const auto& pts = route.dense_points;
  const auto& arc = route.dense_arclength;
  if (s >= arc.back()) {
    return pts.back() + (s - arc.back()) * route.tangent(pts.size() - 1);
  }
  if (s <= 0.0) return pts.front();
  const auto it = std::upper_bound(arc.begin(), arc.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - arc.begin()) - 1;
  const double t = (s - arc[i]) / (arc[i + 1] - arc[i]);
  return pts[i] + t * (pts[i + 1] - pts[i]);
}

PidExpert::PidExpert(PidParams params) : params_(params) { params_.validate(); }

void PidExpert::reset() {
  ct_integral_ = 0.0;
  ct_prev_ = 0.0;
  has_prev_ = false;
  speed_integral_ = 0.0;
}

sim::Action PidExpert::act(const sim::VehicleState& s, const sim::RouteSpec& route,
                           sim::Command command) {
  const auto& p = params_;
  const auto proj = sim::project(route, s.position());
  const double ct = -proj.lateral;  // left of the path is positive: steer right
  ct_integral_ += ct * p.dt;
  const double ct_rate = has_prev_ ? (ct - ct_prev_) / p.dt : 0.0;
  ct_prev_ = ct;
  has_prev_ = true;

  const Vec2 ahead = point_at_arclength(route, proj.arclength + p.lookahead);
  const Vec2 d = ahead - s.position();
  const double c = std::cos(s.heading), sn = std::sin(s.heading);
  const double bearing = std::atan2(-sn * d.x + c * d.y, c * d.x + sn * d.y);

  const double steer = p.kp * ct + p.ki * ct_integral_ + p.kd * ct_rate + p.k_heading * bearing;

  const bool turning = command == sim::Command::kLeft || command == sim::Command::kRight;
  const double v_target = turning ? p.turn_speed : p.target_speed;
  const double v_err = v_target - s.speed;
  speed_integral_ = std::clamp(speed_integral_ + v_err * p.dt, -2.0, 2.0);
  const double feed_forward = p.hold_throttle_per_mps * v_target;
  const double throttle = feed_forward + p.speed_kp * v_err + p.speed_ki * speed_integral_;

  return sim::Action{steer, throttle}.clamped();
}

}  // namespace gaildrive::expert
