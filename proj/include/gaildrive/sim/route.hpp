#ifndef GAILDRIVE_SIM_ROUTE_HPP_
#define GAILDRIVE_SIM_ROUTE_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaildrive/sim/types.hpp"

namespace gaildrive::sim {

enum class RouteKind : std::uint8_t { kShort = 0, kLong = 1, kCustom = 2 };

std::string_view to_string(RouteKind k);
std::optional<RouteKind> parse_route_kind(std::string_view s);

// One piece of the centerline: a straight (curvature 0) or a circular arc.
struct Segment {
  double length = 0.0;
  double curvature = 0.0;  // 1/m; negative turns left
};

// Centerline made of straights and 90 degree turns, plus how it is sampled.
struct RouteLayout {
  RouteKind kind = RouteKind::kCustom;
  std::vector<Segment> segments;
  std::size_t dense_count = 80;
  std::size_t sparse_count = 4;
  double lane_half_width = 1.75;
  double crossing_radius = 2.0;
};

struct RouteSpec {
  RouteKind kind = RouteKind::kShort;
  double length = 0.0;
  std::vector<Vec2> dense_points;
  std::vector<double> dense_arclength;
  std::vector<Vec2> sparse_points;
  std::vector<std::size_t> sparse_dense_index;  // sparse_points[k] == dense_points[index[k]]
  // commands[k] is the maneuver on the leg that ends at sparse point k.
  std::vector<Command> commands;
  double lane_half_width = 1.75;
  double crossing_radius = 2.0;

  // Unit direction of the route at dense point i.
  Vec2 tangent(std::size_t i) const;
};

inline constexpr double kTurnRadius = 10.0;

// Short: 100 m with one left turn; long: 2500 m with left, left, right,
// right turns (the short route is its first 100 m when seed == 0). A
// non-zero seed redistributes the straight lengths, keeping the total.
RouteSpec make_route(RouteKind kind, std::uint64_t seed = 0);

// Straights between `turns` alternating turn pairs (L, L, R, R, ...), scaled
// to `length`; used for reduced-length long routes.
RouteLayout layout_for(RouteKind kind, std::uint64_t seed = 0);
RouteLayout custom_layout(double length, std::size_t turns, std::size_t dense_count,
                          std::size_t sparse_count);
RouteSpec build_route(const RouteLayout& layout);

struct PolylineProjection {
  std::size_t segment = 0;  // index of the dense segment [i, i+1]
  double t = 0.0;           // position within the segment, [0, 1]
  double distance = 0.0;    // unsigned distance to the polyline
  double lateral = 0.0;     // signed: positive when the point is right of the route
  double arclength = 0.0;
};

PolylineProjection project(const RouteSpec& route, Vec2 p);

// Text dump, one waypoint per line:
//   # gaildrive route kind=<k> dense=<n> sparse=<m> length=<meters>
//   x y              (n dense lines)
//   x y COMMAND      (m sparse lines)
void write_route_dump(const RouteSpec& route, std::ostream& out);
RouteSpec read_route_dump(std::istream& in);

}  // namespace gaildrive::sim

#endif  // GAILDRIVE_SIM_ROUTE_HPP_
