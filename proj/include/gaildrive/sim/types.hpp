#ifndef GAILDRIVE_SIM_TYPES_HPP_
#define GAILDRIVE_SIM_TYPES_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gaildrive::sim {

// World frame convention (left-handed, as in CARLA): heading is measured
// from +x towards +y, and a positive steering command increases heading,
// i.e. turns right. In the car frame x points forward and y to the right.

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, (-pi, pi]
  double speed = 0.0;    // m/s, >= 0

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct Action {
  double steer = 0.0;     // [-1, 1], positive turns right
  double throttle = 0.0;  // [0, 1]

  Action clamped() const;
  friend bool operator==(const Action&, const Action&) = default;
};

enum class Command : std::uint8_t { kLaneFollow = 0, kLeft = 1, kRight = 2 };

std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view s);

enum class InfractionKind : std::uint8_t { kLaneInvasion = 0, kStagnation = 1 };

std::string_view to_string(InfractionKind k);
std::optional<InfractionKind> parse_infraction(std::string_view s);

inline constexpr std::size_t kCommandSlots = 6;
inline constexpr std::size_t kContinuousDim = 1 + 2 + kCommandSlots;  // 9
inline constexpr std::size_t kActionDim = 2;
inline constexpr std::size_t kRasterChannels = 3;
inline constexpr std::size_t kRasterSize = 32;
inline constexpr std::size_t kRasterDim = kRasterChannels * kRasterSize * kRasterSize;

struct Observation {
  double speed = 0.0;
  Vec2 target;  // next sparse waypoint in the car frame, meters
  std::array<float, kCommandSlots> command_onehot{};
  std::vector<float> raster;  // empty unless raster mode, else kRasterDim values in [0, 1]

  // [speed, target.x, target.y, onehot...]
  std::array<float, kContinuousDim> continuous() const;
  friend bool operator==(const Observation&, const Observation&) = default;
};

std::array<float, kCommandSlots> encode_command(Command c);

}  // namespace gaildrive::sim

#endif  // GAILDRIVE_SIM_TYPES_HPP_
