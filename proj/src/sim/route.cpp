#include "gaildrive/sim/route.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "gaildrive/common/error.hpp"
#include "gaildrive/common/random.hpp"

namespace gaildrive::sim {

namespace {

constexpr double kQuarterTurn = std::numbers::pi / 2.0;
constexpr double kFirstStraight = 45.0;
constexpr double kShortLength = 100.0;
constexpr double kLongLength = 2500.0;

double turn_length() { return kQuarterTurn * kTurnRadius; }

Segment turn(Command dir) {
  const double k = 1.0 / kTurnRadius;
  return {turn_length(), dir == Command::kLeft ? -k : k};
}

// Straights around `turns` turns; the first straight is fixed, the others
// share the remaining length (equally for seed 0).
RouteLayout straights_and_turns(double length, const std::vector<Command>& turns,
                                std::uint64_t seed) {
  RouteLayout layout;
  if (turns.empty()) {
    layout.segments.push_back({length, 0.0});
    return layout;
  }
  const double remaining = length - kFirstStraight - turn_length() * static_cast<double>(turns.size());
  if (remaining <= 0) throw ConfigError("route too short for its turns");
  std::vector<double> weights(turns.size(), 1.0);
  if (seed != 0) {
    Rng rng = make_rng(seed, 0x726f757465);
    for (auto& w : weights) w = 0.8 + 0.4 * uniform01(rng);
  }
  double wsum = 0;
  for (double w : weights) wsum += w;
  layout.segments.push_back({kFirstStraight, 0.0});
  for (std::size_t i = 0; i < turns.size(); ++i) {
    layout.segments.push_back(turn(turns[i]));
    layout.segments.push_back({remaining * weights[i] / wsum, 0.0});
  }
  return layout;
}

std::vector<Command> turn_sequence(std::size_t n) {
  // left, left, right, right, left, left, ...
  std::vector<Command> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back((i / 2) % 2 == 0 ? Command::kLeft : Command::kRight);
  return out;
}

struct Pose {
  Vec2 p;
  double heading;
};

Pose advance(Pose start, const Segment& seg, double s) {
  if (seg.curvature == 0.0) {
    return {start.p + s * Vec2{std::cos(start.heading), std::sin(start.heading)}, start.heading};
  }
  const double k = seg.curvature;
  const double h1 = start.heading + k * s;
  const Vec2 d{(std::sin(h1) - std::sin(start.heading)) / k,
               -(std::cos(h1) - std::cos(start.heading)) / k};
  return {start.p + d, h1};
}

}  // namespace

std::string_view to_string(RouteKind k) {
  switch (k) {
    case RouteKind::kShort: return "short";
    case RouteKind::kLong: return "long";
    case RouteKind::kCustom: return "custom";
  }
  return "?";
}

std::optional<RouteKind> parse_route_kind(std::string_view s) {
  if (s == "short") return RouteKind::kShort;
  if (s == "long") return RouteKind::kLong;
  if (s == "custom") return RouteKind::kCustom;
  return std::nullopt;
}

Vec2 RouteSpec::tangent(std::size_t i) const {
  const std::size_t n = dense_points.size();
  Vec2 d = i + 1 < n ? dense_points[i + 1] - dense_points[i] : dense_points[i] - dense_points[i - 1];
  const double len = norm(d);
  return (1.0 / len) * d;
}

RouteLayout layout_for(RouteKind kind, std::uint64_t seed) {
  RouteLayout layout;
  switch (kind) {
    case RouteKind::kShort:
      layout = straights_and_turns(kShortLength, {Command::kLeft}, seed);
      layout.dense_count = 80;
      layout.sparse_count = 4;
      break;
    case RouteKind::kLong:
      layout = straights_and_turns(kLongLength, turn_sequence(4), seed);
      layout.dense_count = 760;
      layout.sparse_count = 20;
      break;
    case RouteKind::kCustom:
      throw ConfigError("custom routes need custom_layout()");
  }
  layout.kind = kind;
  return layout;
}

RouteLayout custom_layout(double length, std::size_t turns, std::size_t dense_count,
                          std::size_t sparse_count) {
  RouteLayout layout = straights_and_turns(length, turn_sequence(turns), 0);
  layout.kind = RouteKind::kCustom;
  layout.dense_count = dense_count;
  layout.sparse_count = sparse_count;
  return layout;
}

RouteSpec make_route(RouteKind kind, std::uint64_t seed) { return build_route(layout_for(kind, seed)); }

RouteSpec build_route(const RouteLayout& layout) {
  if (layout.dense_count < 2 || layout.sparse_count < 1 ||
      layout.sparse_count > layout.dense_count - 1) {
    throw ConfigError("route needs >= 2 dense points and 1..dense-1 sparse points");
  }
  RouteSpec r;
  r.kind = layout.kind;
  r.lane_half_width = layout.lane_half_width;
  r.crossing_radius = layout.crossing_radius;
  for (const auto& s : layout.segments) r.length += s.length;

  // Segment start poses and arc-length offsets.
  std::vector<Pose> starts;
  std::vector<double> offsets;
  Pose pose{{0.0, 0.0}, 0.0};
  double offset = 0.0;
  for (const auto& s : layout.segments) {
    starts.push_back(pose);
    offsets.push_back(offset);
    pose = advance(pose, s, s.length);
    offset += s.length;
  }

  const std::size_t n = layout.dense_count;
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = r.length * static_cast<double>(i) / static_cast<double>(n - 1);
    while (seg + 1 < layout.segments.size() && s > offsets[seg] + layout.segments[seg].length) ++seg;
    const double local = std::min(s - offsets[seg], layout.segments[seg].length);
    r.dense_points.push_back(advance(starts[seg], layout.segments[seg], local).p);
    r.dense_arclength.push_back(s);
  }

  const std::size_t m = layout.sparse_count;
  for (std::size_t k = 0; k < m; ++k) {
    const double frac = static_cast<double>(k + 1) * static_cast<double>(n - 1) / static_cast<double>(m);
    const auto idx = static_cast<std::size_t>(std::llround(frac));
    r.sparse_dense_index.push_back(idx);
    r.sparse_points.push_back(r.dense_points[idx]);
  }

  // A leg takes the direction of the first turn that overlaps it.
  double leg_start = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double leg_end = r.dense_arclength[r.sparse_dense_index[k]];
    Command c = Command::kLaneFollow;
    for (std::size_t j = 0; j < layout.segments.size(); ++j) {
      const auto& s = layout.segments[j];
      if (s.curvature == 0.0) continue;
      const double a = offsets[j], b = offsets[j] + s.length;
      if (a < leg_end && b > leg_start) {
        c = s.curvature < 0 ? Command::kLeft : Command::kRight;
        break;
      }
    }
    r.commands.push_back(c);
    leg_start = leg_end;
  }
  return r;
}

PolylineProjection project(const RouteSpec& route, Vec2 p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  const auto& pts = route.dense_points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i], d = pts[i + 1] - pts[i];
    const double len2 = dot(d, d);
    const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    const Vec2 q = a + t * d;
    const double dist = norm(p - q);
    if (dist < best.distance) {
      best.segment = i;
      best.t = t;
      best.distance = dist;
      best.lateral = cross(d, p - a) >= 0 ? dist : -dist;
      best.arclength = route.dense_arclength[i] +
                       t * (route.dense_arclength[i + 1] - route.dense_arclength[i]);
    }
  }
  return best;
}

void write_route_dump(const RouteSpec& route, std::ostream& out) {
  out << "# gaildrive route kind=" << to_string(route.kind) << " dense=" << route.dense_points.size()
      << " sparse=" << route.sparse_points.size() << " length=" << std::fixed
      << std::setprecision(3) << route.length << "\n";
  out << std::setprecision(6);
  for (const auto& p : route.dense_points) out << p.x << " " << p.y << "\n";
  for (std::size_t k = 0; k < route.sparse_points.size(); ++k) {
    out << route.sparse_points[k].x << " " << route.sparse_points[k].y << " "
        << to_string(route.commands[k]) << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

RouteSpec read_route_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# gaildrive route", 0) != 0) {
    throw FormatError("missing route dump header");
  }
  RouteSpec r;
  std::size_t n = 0, m = 0;
  std::istringstream hs(line.substr(17));
  std::string field;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const auto key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "kind") {
      auto k = parse_route_kind(value);
      if (!k) throw FormatError("unknown route kind " + value);
      r.kind = *k;
    } else if (key == "dense") {
      n = std::stoul(value);
    } else if (key == "sparse") {
      m = std::stoul(value);
    } else if (key == "length") {
      r.length = std::stod(value);
    }
  }
  for (std::size_t i = 0; i < n + m; ++i) {
    if (!std::getline(in, line)) throw FormatError("route dump truncated");
    std::istringstream ls(line);
    Vec2 p;
    if (!(ls >> p.x >> p.y)) throw FormatError("bad waypoint line: " + line);
    if (i < n) {
      r.dense_points.push_back(p);
    } else {
      std::string cmd;
      ls >> cmd;
      auto c = parse_command(cmd);
      if (!c) throw FormatError("bad command on line: " + line);
      r.sparse_points.push_back(p);
      r.commands.push_back(*c);
    }
  }
  return r;
}

}  // namespace gaildrive::sim
