#include "gaildrive/sim/types.hpp"

#include <algorithm>
#include <numbers>

namespace gaildrive::sim {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

Action Action::clamped() const {
  const double s = std::isfinite(steer) ? steer : 0.0;
  const double t = std::isfinite(throttle) ? throttle : 0.0;
  return {std::clamp(s, -1.0, 1.0), std::clamp(t, 0.0, 1.0)};
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::kLaneFollow: return "LANE_FOLLOW";
    case Command::kLeft: return "LEFT";
    case Command::kRight: return "RIGHT";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view s) {
  if (s == "LANE_FOLLOW") return Command::kLaneFollow;
  if (s == "LEFT") return Command::kLeft;
  if (s == "RIGHT") return Command::kRight;
  return std::nullopt;
}

std::string_view to_string(InfractionKind k) {
  switch (k) {
    case InfractionKind::kLaneInvasion: return "LANE_INVASION";
    case InfractionKind::kStagnation: return "STAGNATION";
  }
  return "?";
}

std::optional<InfractionKind> parse_infraction(std::string_view s) {
  if (s == "LANE_INVASION") return InfractionKind::kLaneInvasion;
  if (s == "STAGNATION") return InfractionKind::kStagnation;
  return std::nullopt;
}

std::array<float, kCommandSlots> encode_command(Command c) {
  std::array<float, kCommandSlots> v{};
  v[static_cast<std::size_t>(c)] = 1.0f;
  return v;
}

std::array<float, kContinuousDim> Observation::continuous() const {
  std::array<float, kContinuousDim> v{};
  v[0] = static_cast<float>(speed);
  v[1] = static_cast<float>(target.x);
  v[2] = static_cast<float>(target.y);
  std::copy(command_onehot.begin(), command_onehot.end(), v.begin() + 3);
  return v;
}

}  // namespace gaildrive::sim
