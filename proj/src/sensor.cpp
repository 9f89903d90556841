#include "tactsim/sensor.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "tactsim/geometry.hpp"
#include "tactsim/rng.hpp"

namespace tactsim::render {

namespace {
constexpr double kPi = std::numbers::pi;
}

Vec3 CameraModel::pixel_ray(double px, double py) const {
  const double dx = px - center_x;
  const double dy = py - center_y;
  const double r = std::hypot(dx, dy);
  if (r <= 0.0) return {0.0, 0.0, 1.0};
  const double theta = r / focal;
  const double s = std::sin(theta);
  return {s * dx / r, s * dy / r, std::cos(theta)};
}

bool CameraModel::project(const Vec3& p, double& px, double& py) const {
  const Vec3 v = p - position;
  const double rho = std::hypot(v.x, v.y);
  const double theta = std::atan2(rho, v.z);
  if (theta > 2.8) return false;
  const double r = focal * theta;
  px = center_x + (rho > 0.0 ? r * v.x / rho : 0.0);
  py = center_y + (rho > 0.0 ? r * v.y / rho : 0.0);
  return true;
}

std::string pattern_name(LedPattern pattern) {
  switch (pattern) {
    case LedPattern::White:
      return "white";
    case LedPattern::RRRGGGBBB:
      return "rrrgggbbb";
    case LedPattern::RGBRGBRGB:
      return "rgbrgbrgb";
  }
  return "white";
}

LedPattern parse_pattern(const std::string& name) {
  if (name == "white") return LedPattern::White;
  if (name == "rrrgggbbb") return LedPattern::RRRGGGBBB;
  if (name == "rgbrgbrgb") return LedPattern::RGBRGBRGB;
  throw std::invalid_argument("unknown LED pattern: " + name);
}

Vec3 LedConfig::led_position(int k) const {
  const double ang = 2.0 * kPi * k / count;
  return {ring_radius * std::cos(ang), ring_radius * std::sin(ang), ring_z};
}

Vec3 LedConfig::beam_axis(int k) const {
  return (Vec3{0.0, 0.0, beam_aim_z} - led_position(k)).normalized();
}

Vec3 LedConfig::led_color(int k) const {
  int channel = 0;
  switch (pattern) {
    case LedPattern::White:
      return {1.0, 1.0, 1.0};
    case LedPattern::RRRGGGBBB:
      channel = k / 3;
      break;
    case LedPattern::RGBRGBRGB:
      channel = k % 3;
      break;
  }
  Vec3 c{0.0, 0.0, 0.0};
  (channel == 0 ? c.x : channel == 1 ? c.y : c.z) = 1.0;
  return c;
}

int MarkerLayout::count() const {
  int n = apex_dot ? 1 : 0;
  for (int c : ring_counts) n += c;
  return n;
}

namespace {

std::vector<std::array<double, 2>> nominal_marker_uv(const MarkerLayout& layout) {
  std::vector<std::array<double, 2>> uv;
  for (std::size_t r = 0; r < layout.ring_counts.size(); ++r) {
    const int c = layout.ring_counts[r];
    for (int k = 0; k < c; ++k) uv.push_back({2.0 * kPi * k / c, layout.ring_axials[r]});
  }
  if (layout.apex_dot) uv.push_back({0.0, 1.0});
  return uv;
}

SensorInstance base_instance(const std::string& id, LedPattern pattern,
                             bool markers_enabled) {
  SensorInstance inst;
  inst.id = id;
  inst.leds.pattern = pattern;
  inst.markers.enabled = markers_enabled;
  inst.led_gains.assign(inst.leds.count, 1.0);
  if (markers_enabled) inst.marker_uv = nominal_marker_uv(inst.markers);
  return inst;
}

}  // namespace

SensorInstance nominal_instance(const std::string& id, LedPattern pattern,
                                bool markers_enabled) {
  return base_instance(id, pattern, markers_enabled);
}

SensorInstance make_instance(const std::string& id, LedPattern pattern,
                             bool markers_enabled, std::uint64_t seed) {
  SensorInstance inst = base_instance(id, pattern, markers_enabled);
  inst.seed = seed;
  Rng rng(derive_seed(seed, 0x5E4508ULL));

  for (auto& g : inst.led_gains) g = rng.uniform(0.85, 1.15);
  for (auto& b : inst.rgb_balance) b = rng.uniform(0.9, 1.1);
  inst.coating_albedo = rng.uniform(0.8, 1.0);

  const double off_ang = rng.uniform(0.0, 2.0 * kPi);
  const double off_r = rng.uniform(0.0, 3.0);
  inst.camera.center_x += off_r * std::cos(off_ang);
  inst.camera.center_y += off_r * std::sin(off_ang);
  inst.camera.focal *= 1.0 + rng.uniform(-0.02, 0.02);

  if (markers_enabled) {
    const geometry::ShellGeometry geom{};
    for (auto& [u, axial] : inst.marker_uv) {
      const auto sp = geometry::surface_point(geom, u, axial);
      const auto frame = geometry::contact_frame(sp);
      const Vec3 jittered = sp.position + frame.axes.col[0] * rng.normal(0.0, 0.2) +
                            frame.axes.col[1] * rng.normal(0.0, 0.2);
      const auto back = geometry::project_to_surface(geom, jittered);
      u = back.u;
      axial = back.axial;
    }
  }
  return inst;
}

std::string SensorInstance::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["seed"] = seed;
  j["camera"] = {{"position", {camera.position.x, camera.position.y, camera.position.z}},
                 {"focal", camera.focal},
                 {"center_x", camera.center_x},
                 {"center_y", camera.center_y},
                 {"size", camera.size},
                 {"mask_radius", camera.mask_radius}};
  j["leds"] = {{"count", leds.count},
               {"ring_radius", leds.ring_radius},
               {"ring_z", leds.ring_z},
               {"pattern", pattern_name(leds.pattern)},
               {"intensity", leds.intensity},
               {"beam_exponent", leds.beam_exponent},
               {"beam_aim_z", leds.beam_aim_z}};
  j["markers"] = {{"enabled", markers.enabled},
                  {"ring_counts", markers.ring_counts},
                  {"ring_axials", markers.ring_axials},
                  {"apex_dot", markers.apex_dot},
                  {"dot_radius", markers.dot_radius},
                  {"dot_albedo", markers.dot_albedo}};
  j["led_gains"] = led_gains;
  j["rgb_balance"] = rgb_balance;
  j["coating_albedo"] = coating_albedo;
  j["marker_uv"] = marker_uv;
  return j.dump();
}

SensorInstance SensorInstance::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SensorInstance inst;
  inst.id = j.at("id").get<std::string>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  const auto& cam = j.at("camera");
  const auto& pos = cam.at("position");
  inst.camera.position = {pos.at(0).get<double>(), pos.at(1).get<double>(),
                          pos.at(2).get<double>()};
  inst.camera.focal = cam.at("focal").get<double>();
  inst.camera.center_x = cam.at("center_x").get<double>();
  inst.camera.center_y = cam.at("center_y").get<double>();
  inst.camera.size = cam.at("size").get<int>();
  inst.camera.mask_radius = cam.at("mask_radius").get<double>();
  const auto& leds = j.at("leds");
  inst.leds.count = leds.at("count").get<int>();
  inst.leds.ring_radius = leds.at("ring_radius").get<double>();
  inst.leds.ring_z = leds.at("ring_z").get<double>();
  inst.leds.pattern = parse_pattern(leds.at("pattern").get<std::string>());
  inst.leds.intensity = leds.at("intensity").get<double>();
  inst.leds.beam_exponent = leds.at("beam_exponent").get<double>();
  inst.leds.beam_aim_z = leds.at("beam_aim_z").get<double>();
  const auto& mk = j.at("markers");
  inst.markers.enabled = mk.at("enabled").get<bool>();
  inst.markers.ring_counts = mk.at("ring_counts").get<std::vector<int>>();
  inst.markers.ring_axials = mk.at("ring_axials").get<std::vector<double>>();
  inst.markers.apex_dot = mk.at("apex_dot").get<bool>();
  inst.markers.dot_radius = mk.at("dot_radius").get<double>();
  inst.markers.dot_albedo = mk.at("dot_albedo").get<double>();
  inst.led_gains = j.at("led_gains").get<std::vector<double>>();
  const auto& bal = j.at("rgb_balance");
  for (int c = 0; c < 3; ++c) inst.rgb_balance[c] = bal.at(c).get<double>();
  inst.coating_albedo = j.at("coating_albedo").get<double>();
  inst.marker_uv = j.at("marker_uv").get<std::vector<std::array<double, 2>>>();
  return inst;
}

}  // namespace tactsim::render
