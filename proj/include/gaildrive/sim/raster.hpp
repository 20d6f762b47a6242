#ifndef GAILDRIVE_SIM_RASTER_HPP_
#define GAILDRIVE_SIM_RASTER_HPP_

#include <array>
#include <vector>

#include "gaildrive/sim/route.hpp"
#include "gaildrive/sim/types.hpp"

namespace gaildrive::sim {

struct RasterConfig {
  double meters_per_pixel = 0.5;
  double ahead = 8.0;                          // crop center distance from the car, m
  std::array<double, 3> yaw_offsets_deg{-30.0, 0.0, 30.0};
  double overlay_radius = 0.35;                // dense point marker radius, m
};

// Channel-major [3][32][32]. Row 0 is the far edge of the crop, column 16 is
// on the view axis. Lane 1.0, dense route markers 0.5, off-road 0.0.
std::vector<float> render_raster(const VehicleState& s, const RouteSpec& route,
                                 const RasterConfig& cfg = {});

}  // namespace gaildrive::sim

#endif  // GAILDRIVE_SIM_RASTER_HPP_
