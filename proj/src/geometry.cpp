#include "tactsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tactsim/rng.hpp"

namespace tactsim {

std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

}  // namespace tactsim

namespace tactsim::geometry {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap_azimuth(double u) {
  u = std::fmod(u, 2.0 * kPi);
  return u < 0.0 ? u + 2.0 * kPi : u;
}
}  // namespace

double ShellGeometry::meridian_length() const {
  return cyl_height + 0.5 * kPi * hemisphere_radius;
}

double ShellGeometry::seam_axial() const { return cyl_height / meridian_length(); }

double ShellGeometry::apex_height() const { return cyl_height + hemisphere_radius; }

double ShellGeometry::area() const {
  return 2.0 * kPi * cyl_radius * cyl_height +
         2.0 * kPi * hemisphere_radius * hemisphere_radius;
}

double ShellGeometry::hemisphere_area_fraction() const {
  return 2.0 * kPi * hemisphere_radius * hemisphere_radius / area();
}

double ShellGeometry::area_fraction(double axial) const {
  axial = std::clamp(axial, 0.0, 1.0);
  const double s = axial * meridian_length();
  double a;
  if (s <= cyl_height) {
    a = 2.0 * kPi * cyl_radius * s;
  } else {
    const double psi = (s - cyl_height) / hemisphere_radius;
    a = 2.0 * kPi * cyl_radius * cyl_height +
        2.0 * kPi * hemisphere_radius * hemisphere_radius * std::sin(psi);
  }
  return a / area();
}

void ShellGeometry::validate() const {
  if (!(cyl_radius > 0.0) || !(cyl_height > 0.0) || !(hemisphere_radius > 0.0))
    throw std::invalid_argument("ShellGeometry: all lengths must be positive");
  if (std::abs(hemisphere_radius - cyl_radius) > 1e-12)
    throw std::invalid_argument(
        "ShellGeometry: hemisphere_radius must equal cyl_radius");
}

SurfacePoint surface_point(const ShellGeometry& geom, double u, double axial) {
  if (!(u >= 0.0 && u < 2.0 * kPi))
    throw std::domain_error("surface_point: azimuth out of [0, 2*pi): " +
                            std::to_string(u));
  if (!(axial >= 0.0 && axial <= 1.0))
    throw std::domain_error("surface_point: axial out of [0, 1]: " +
                            std::to_string(axial));

  const double R = geom.cyl_radius;
  const double s = axial * geom.meridian_length();
  const double cu = std::cos(u), su = std::sin(u);

  SurfacePoint sp;
  sp.u = u;
  sp.axial = axial;
  if (s <= geom.cyl_height) {
    sp.position = {R * cu, R * su, s};
    sp.normal = {cu, su, 0.0};
  } else {
    const double psi = (s - geom.cyl_height) / geom.hemisphere_radius;
    const double cp = std::cos(psi), spn = std::sin(psi);
    sp.position = {R * cp * cu, R * cp * su, geom.cyl_height + R * spn};
    sp.normal = {cp * cu, cp * su, spn};
  }
  return sp;
}

SurfacePoint project_to_surface(const ShellGeometry& geom, const Vec3& p) {
  const double R = geom.cyl_radius;
  const double H = geom.cyl_height;
  const double L = geom.meridian_length();
  const double rho = std::hypot(p.x, p.y);
  // Azimuth-0 convention on the symmetry axis.
  const double u = rho > 0.0 ? wrap_azimuth(std::atan2(p.y, p.x)) : 0.0;
  const double cu = std::cos(u), su = std::sin(u);

  // Candidate on the wall (z clamped to the wall span).
  SurfacePoint wall;
  wall.u = u;
  const double zw = std::clamp(p.z, 0.0, H);
  wall.position = {R * cu, R * su, zw};
  wall.normal = {cu, su, 0.0};
  wall.axial = zw / L;

  // Candidate on the hemisphere.
  const Vec3 center{0.0, 0.0, H};
  Vec3 w = p - center;
  if (w.norm() == 0.0) w = {0.0, 0.0, 1.0};  // center: apex convention
  SurfacePoint hemi;
  if (w.z >= 0.0) {
    const Vec3 dir = w.normalized();
    hemi.position = center + R * dir;
    const double psi = std::asin(std::clamp(dir.z, -1.0, 1.0));
    hemi.normal = dir;
    const double hr = std::hypot(dir.x, dir.y);
    hemi.u = hr > 0.0 ? wrap_azimuth(std::atan2(dir.y, dir.x)) : u;
    hemi.axial = (H + R * psi) / L;
  } else {
    // Below the equator the nearest hemisphere point is on the seam circle.
    hemi.position = {R * cu, R * su, H};
    hemi.normal = {cu, su, 0.0};
    hemi.u = u;
    hemi.axial = H / L;
  }

  const double dw = (p - wall.position).norm2();
  const double dh = (p - hemi.position).norm2();
  SurfacePoint best = (dh < dw) ? hemi : wall;
  // Renormalize the degenerate-azimuth hemisphere case (axis above center).
  if (std::hypot(best.position.x, best.position.y) < 1e-12) {
    best.u = 0.0;
    best.position.x = best.position.y = 0.0;
  }
  return best;
}

ContactFrame contact_frame(const SurfacePoint& sp) {
  ContactFrame frame;
  frame.origin = sp.position;
  const Vec3 zaxis = sp.normal.normalized();
  // Azimuthal tangent direction; well defined at the apex as the limit.
  const Vec3 xaxis = Vec3{-std::sin(sp.u), std::cos(sp.u), 0.0}.normalized();
  const Vec3 yaxis = zaxis.cross(xaxis).normalized();
  frame.axes.col = {xaxis, yaxis, zaxis};
  return frame;
}

std::vector<SurfacePoint> sample_surface(const ShellGeometry& geom, std::size_t n,
                                         uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_surface: n must be >= 1");
  const double L = geom.meridian_length();
  const double hemi_frac = geom.hemisphere_area_fraction();

  Rng rng(derive_seed(seed, 0x5u));
  std::vector<SurfacePoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform(0.0, 2.0 * kPi);
    double axial;
    if (rng.uniform() < hemi_frac) {
      // dA ~ cos(psi) dpsi on the hemisphere, so sin(psi) is uniform.
      const double psi = std::asin(rng.uniform());
      axial = (geom.cyl_height + geom.hemisphere_radius * psi) / L;
    } else {
      axial = rng.uniform(0.0, geom.cyl_height) / L;
    }
    out.push_back(surface_point(geom, u, std::min(axial, 1.0)));
  }
  return out;
}

int azimuth_bin(double u, int n_bins) {
  const double f = wrap_azimuth(u) / (2.0 * kPi);
  return std::min(static_cast<int>(f * n_bins), n_bins - 1);
}

int axial_area_bin(const ShellGeometry& geom, double axial, int n_bins) {
  const double f = geom.area_fraction(axial);
  return std::min(static_cast<int>(f * n_bins), n_bins - 1);
}

const SurfaceGrid& shared_surface_grid(const ShellGeometry& geom, int res_u,
                                       int res_axial) {
  if (res_u < 2 || res_axial < 2)
    throw std::invalid_argument("shared_surface_grid: resolution must be >= 2");

  struct Entry {
    double radius, height, hemi;
    SurfaceGrid grid;
  };
  static std::mutex mu;
  static std::vector<std::unique_ptr<Entry>> cache;

  std::lock_guard<std::mutex> lock(mu);
  for (const auto& e : cache) {
    if (e->radius == geom.cyl_radius && e->height == geom.cyl_height &&
        e->hemi == geom.hemisphere_radius && e->grid.res_u == res_u &&
        e->grid.res_axial == res_axial)
      return e->grid;
  }

  auto entry = std::make_unique<Entry>();
  entry->radius = geom.cyl_radius;
  entry->height = geom.cyl_height;
  entry->hemi = geom.hemisphere_radius;
  SurfaceGrid& g = entry->grid;
  g.res_u = res_u;
  g.res_axial = res_axial;
  g.positions.resize(static_cast<std::size_t>(res_u) * res_axial);
  g.normals.resize(g.positions.size());
  for (int j = 0; j < res_axial; ++j) {
    const double axial = static_cast<double>(j) / (res_axial - 1);
    for (int i = 0; i < res_u; ++i) {
      const double u = 2.0 * kPi * i / res_u;
      const SurfacePoint sp = surface_point(geom, u, axial);
      g.positions[g.index(i, j)] = sp.position;
      g.normals[g.index(i, j)] = sp.normal;
    }
  }
  cache.push_back(std::move(entry));
  return cache.back()->grid;
}

}  // namespace tactsim::geometry
