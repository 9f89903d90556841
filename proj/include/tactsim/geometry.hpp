#pragma once

#include <cstdint>
#include <vector>

#include "tactsim/vec.hpp"

namespace tactsim::geometry {

// Sensing membrane: a cylinder wall of height cyl_height capped by a
// hemisphere of the same radius. Origin at the base center, +z toward the
// apex. All lengths in mm.
struct ShellGeometry {
  double cyl_radius = 12.0;
  double cyl_height = 14.0;
  double hemisphere_radius = 12.0;

  double meridian_length() const;        // wall height + quarter-circle arc
  double seam_axial() const;             // axial param of the wall/hemisphere seam
  double apex_height() const;            // cyl_height + hemisphere_radius
  double area() const;                   // total membrane area
  double hemisphere_area_fraction() const;

  // Cumulative area fraction below axial parameter a, in [0,1]. Monotone.
  double area_fraction(double axial) const;

  void validate() const;  // throws std::invalid_argument on bad dimensions
};

struct SurfacePoint {
  Vec3 position;
  Vec3 normal;     // outward unit normal
  double u = 0.0;      // azimuth, [0, 2*pi)
  double axial = 0.0;  // arc-length-proportional axial parameter, [0, 1]
};

// Right-handed orthonormal frame at a surface point: z = outward normal,
// x = azimuthal tangent, y = z cross x (meridian tangent toward the apex).
struct ContactFrame {
  Vec3 origin;
  Mat3 axes;
};

// Point + normal for (u, axial). Throws std::domain_error outside
// u in [0, 2*pi), axial in [0, 1].
SurfacePoint surface_point(const ShellGeometry& geom, double u, double axial);

// Nearest point on the undeformed membrane. Points on the symmetry axis use
// the azimuth = 0 convention.
SurfacePoint project_to_surface(const ShellGeometry& geom, const Vec3& p);

ContactFrame contact_frame(const SurfacePoint& sp);

// n area-uniform samples over the membrane; deterministic per seed.
// Throws std::invalid_argument for n == 0.
std::vector<SurfacePoint> sample_surface(const ShellGeometry& geom, std::size_t n,
                                         uint64_t seed);

// Equal-area surface binning (used by coverage checks and error heatmaps).
int azimuth_bin(double u, int n_bins);
int axial_area_bin(const ShellGeometry& geom, double axial, int n_bins);

// Surface positions and normals sampled on a regular (u, axial) lattice:
// u_i = 2*pi*i/res_u (wraps), a_j = j/(res_axial-1).
struct SurfaceGrid {
  int res_u = 0;
  int res_axial = 0;
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * res_u + i;
  }
};

// Memoized grid shared by the deformation and rendering paths. The returned
// reference stays valid for the program lifetime.
const SurfaceGrid& shared_surface_grid(const ShellGeometry& geom, int res_u,
                                       int res_axial);

}  // namespace tactsim::geometry
