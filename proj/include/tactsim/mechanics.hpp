#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tactsim/geometry.hpp"
#include "tactsim/vec.hpp"

namespace tactsim::mech {

// Rigid indenter head, presented tip-first along the inward contact normal.
// Prism heads (square, hexagon, ellipse) are flat-faced columns; their
// cross-section axes are aligned with the contact frame.
struct Indenter {
  enum class Shape { Sphere, Square, Hexagon, Ellipse };

  Shape shape = Shape::Sphere;
  double dim_a = 3.0;  // sphere radius / polygon edge / ellipse semi-axis, mm
  double dim_b = 0.0;  // ellipse second semi-axis, mm

  static Indenter sphere(double radius);
  static Indenter square(double edge);
  static Indenter hexagon(double edge);
  static Indenter ellipse(double semi_a, double semi_b);

  // Radius of the circle with the same cross-section area.
  double equivalent_radius() const;
  // Contact patch radius at the given depth (spheres grow with depth,
  // flat-faced heads are constant). Drives the torsion cap.
  double footprint_radius(double depth) const;
  // Depth at which the normal load reaches the sensing range cap, clamped
  // to the depth range cap.
  double max_depth() const;

  std::string descriptor() const;  // e.g. "sphere:3", "ellipse:4x2"
  static Indenter parse(const std::string& text);

  bool operator==(const Indenter&) const = default;
};

// The six heads used for data generation: spheres r=3,4,5, square edge 6,
// hexagon edge 3, ellipse semi-axes 4x2.
std::vector<Indenter> default_indenters();

// One contact configuration: where, how deep, and the tangential motion of
// the gripped material (slip in contact-frame x/y, twist about the normal).
struct ContactSpec {
  double u = 0.0;
  double axial = 1.0;
  double depth = 0.0;   // mm, >= 0
  double slip_x = 0.0;  // mm
  double slip_y = 0.0;  // mm
  double twist = 0.0;   // rad
};

// Ground-truth label: contact point in the sensor frame, force in the
// contact frame, torque about the contact normal.
struct ContactState {
  Vec3 position;
  Vec3 force;
  double torque = 0.0;
};

namespace load {
// Normal law |f_z| = k_normal * sqrt(r_eff) * d^1.5. The constant is
// sqrt(6), which puts a 3 mm sphere at exactly 12 N when 2 mm deep.
inline constexpr double k_normal = 2.449489742783178;
inline constexpr double k_tangential = 1.2;  // N/mm^2
inline constexpr double k_torsion = 0.042;   // N*m/(rad*mm^2)
inline constexpr double friction = 1.0;

// Label ranges generated data must stay inside.
inline constexpr double min_normal_force = -12.0;
inline constexpr double max_normal_force = 0.8;
inline constexpr double max_shear_force = 5.0;
inline constexpr double max_torque = 0.05;
inline constexpr double max_indent_depth = 3.0;

// Held depth drawn for tilt/twist episodes.
inline constexpr double hold_depth_min = 0.5;
inline constexpr double hold_depth_max = 1.5;

// Largest slip/twist magnitudes that keep the pre-cap tangential force and
// torque inside the label ranges at the deepest held depth.
inline constexpr double tilt_slip_limit =
    max_shear_force / (k_tangential * hold_depth_max);
inline constexpr double twist_angle_limit =
    max_torque / (k_torsion * hold_depth_max * hold_depth_max);
}  // namespace load

// Contact-frame force and normal torque for a contact. Throws
// std::domain_error for depth < 0.
std::pair<Vec3, double> contact_load(const Indenter& ind, const ContactSpec& spec);

// Gaussian skirt width around the contact footprint, mm.
inline constexpr double skirt_sigma = 1.5;
// The skirt is truncated to zero past this geodesic distance.
inline constexpr double skirt_reach = 5.0 * skirt_sigma;

inline constexpr int field_res_u = 512;
inline constexpr int field_res_axial = 256;

// Inward membrane displacement sampled on a (u, axial) grid. `inward` holds
// millimetres of motion along the inward normal; `stick` holds the fraction
// of the indenter's tangential motion carried by the membrane at each node
// (1 inside the footprint, Gaussian decay outside).
struct DisplacementField {
  int res_u = 0;
  int res_axial = 0;
  std::vector<double> inward;
  std::vector<double> stick;
  std::vector<std::uint8_t> footprint;
  double max_inward = 0.0;
  bool clipped = false;  // footprint ran into the base rim

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * res_u + i;
  }
  double inward_at(double u, double axial) const;
  double stick_at(double u, double axial) const;
};

// Rigid-penetration field inside the footprint, Gaussian skirt outside.
// Throws std::domain_error for depth < 0, std::invalid_argument for a grid
// smaller than 8x8.
DisplacementField displacement_field(const geometry::ShellGeometry& geom,
                                     const Indenter& ind, const ContactSpec& spec,
                                     int res_u = field_res_u,
                                     int res_axial = field_res_axial);

enum class EpisodeMode { Press, Tilt, Twist };

std::string mode_name(EpisodeMode mode);
EpisodeMode parse_mode(const std::string& name);

// A short contact trajectory at a fixed surface point. Press ramps depth
// from zero; tilt and twist approach to a held depth drawn from the seed,
// then sweep slip / twist through one triangle-wave cycle.
struct Episode {
  double u = 0.0;
  double axial = 1.0;
  EpisodeMode mode = EpisodeMode::Press;
  double magnitude = 0.0;  // press: depth mm; tilt: slip mm; twist: rad
  std::uint64_t seed = 0;
  std::vector<ContactSpec> frames;
};

// Throws std::invalid_argument for frames < 2 and std::domain_error for a
// magnitude outside the mode's label-range-safe limit.
Episode make_episode(double u, double axial, EpisodeMode mode, double magnitude,
                     int frames, std::uint64_t seed);

std::vector<std::pair<ContactSpec, ContactState>> episode_states(
    const geometry::ShellGeometry& geom, const Episode& episode, const Indenter& ind);

}  // namespace tactsim::mech
