#include "gaildrive/sim/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gaildrive::sim {

namespace {

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
  return norm(p - (a + t * d));
}

}  // namespace

std::vector<float> render_raster(const VehicleState& s, const RouteSpec& route,
                                 const RasterConfig& cfg) {
  constexpr int kSize = static_cast<int>(kRasterSize);
  constexpr int kHalf = kSize / 2;
  std::vector<float> out(kRasterDim, 0.0f);
  const Vec2 car = s.position();
  const auto& pts = route.dense_points;

  // Anything farther than this from the car cannot touch any crop.
  const double half_extent = kHalf * cfg.meters_per_pixel;
  const double reach = std::hypot(cfg.ahead + half_extent, half_extent) + route.lane_half_width + 1.0;
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (segment_distance(car, pts[i], pts[i + 1]) <= reach) near.push_back(i);
  }
  if (near.empty()) return out;

  for (std::size_t v = 0; v < kRasterChannels; ++v) {
    const double yaw = s.heading + cfg.yaw_offsets_deg[v] * std::numbers::pi / 180.0;
    const Vec2 fwd{std::cos(yaw), std::sin(yaw)};
    const Vec2 right{-std::sin(yaw), std::cos(yaw)};
    float* img = out.data() + v * kSize * kSize;
    for (int r = 0; r < kSize; ++r) {
      const double f = cfg.ahead + (kHalf - r) * cfg.meters_per_pixel;
      for (int c = 0; c < kSize; ++c) {
        const double l = (c - kHalf) * cfg.meters_per_pixel;
        const Vec2 p = car + f * fwd + l * right;
        double lane = std::numeric_limits<double>::infinity();
        double marker = lane;
        for (std::size_t i : near) {
          lane = std::min(lane, segment_distance(p, pts[i], pts[i + 1]));
          marker = std::min({marker, norm(p - pts[i]), norm(p - pts[i + 1])});
        }
        float value = 0.0f;
        if (lane <= route.lane_half_width) value = marker <= cfg.overlay_radius ? 0.5f : 1.0f;
        img[r * kSize + c] = value;
      }
    }
  }
  return out;
}

}  // namespace gaildrive::sim
