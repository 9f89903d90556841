#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "tactsim/image.hpp"
#include "tactsim/vec.hpp"

namespace tactsim::render {

// Equidistant fisheye looking up the +z axis: r_px = focal * theta. The
// 160-degree cone lands exactly on the 240 px mask circle.
struct CameraModel {
  Vec3 position{0.0, 0.0, -2.0};
  double focal = 540.0 / std::numbers::pi;  // px per rad
  double center_x = 240.0;
  double center_y = 240.0;
  int size = 480;
  double mask_radius = 240.0;

  // Unit ray direction through a pixel center.
  Vec3 pixel_ray(double px, double py) const;
  // World point to pixel; false behind the camera hemisphere limit.
  bool project(const Vec3& p, double& px, double& py) const;
  // The mask circle is anchored to the image frame, not the optical center.
  bool inside_mask(double px, double py) const {
    const double dx = px - size / 2.0, dy = py - size / 2.0;
    return dx * dx + dy * dy <= mask_radius * mask_radius;
  }
};

enum class LedPattern { White, RRRGGGBBB, RGBRGBRGB };

std::string pattern_name(LedPattern pattern);
LedPattern parse_pattern(const std::string& name);

struct LedConfig {
  int count = 9;
  double ring_radius = 13.5;  // mm
  double ring_z = -1.0;       // mm
  LedPattern pattern = LedPattern::White;
  double intensity = 260.0;  // radiance scale, mm^2
  double beam_exponent = 8.0;
  // Collimators tilt every beam toward this point on the symmetry axis so
  // the ring lights the whole cavity, not just the dome.
  double beam_aim_z = 20.0;

  Vec3 led_position(int k) const;
  Vec3 led_color(int k) const;  // unit-range RGB before gains
  Vec3 beam_axis(int k) const;  // unit emission axis
};

// Sparse dot grid: rings of dots from base to apex plus one apex dot.
struct MarkerLayout {
  bool enabled = true;
  std::vector<int> ring_counts{12, 10, 8, 6};
  std::vector<double> ring_axials{0.18, 0.38, 0.58, 0.78};
  bool apex_dot = true;
  double dot_radius = 0.5;  // mm
  double dot_albedo = 0.15;

  int count() const;
};

// One fabricated sensor: nominal design plus frozen per-unit perturbations.
struct SensorInstance {
  std::string id;
  std::uint64_t seed = 0;
  CameraModel camera;
  LedConfig leds;
  MarkerLayout markers;
  std::vector<double> led_gains;          // per LED
  std::array<double, 3> rgb_balance{1.0, 1.0, 1.0};
  double coating_albedo = 0.9;
  std::vector<std::array<double, 2>> marker_uv;  // jittered (u, axial) per dot

  // Reference image cache, filled by reference_image().
  mutable std::shared_ptr<const img::Image8> reference_cache;

  std::string to_json() const;
  static SensorInstance from_json(const std::string& text);
};

// Perturbation-free instance (unit gains, centered camera, exact layout).
SensorInstance nominal_instance(const std::string& id, LedPattern pattern,
                                bool markers_enabled);

// Draws the frozen fabrication perturbations from the seed: per-LED gain
// U[0.85,1.15], RGB balance U[0.9,1.1], coating albedo U[0.8,1.0], marker
// jitter sigma 0.2 mm, camera center offset up to 3 px, focal +/-2%.
SensorInstance make_instance(const std::string& id, LedPattern pattern,
                             bool markers_enabled, std::uint64_t seed);

}  // namespace tactsim::render
