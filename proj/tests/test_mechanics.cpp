#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <set>
#include <vector>

#include "tactsim/geometry.hpp"
#include "tactsim/mechanics.hpp"
#include "tactsim/rng.hpp"

using namespace tactsim;
using namespace tactsim::mech;

namespace {

constexpr double kPi = std::numbers::pi;

// ---- independent oracles ---------------------------------------------------

// Normal load evaluated from the stated power law, written without reusing
// library code paths.
double oracle_normal_force(double r_eff, double depth) {
  return 2.449489742783178 * std::sqrt(r_eff) * std::pow(depth, 1.5);
}

// Equal-area radius from an explicit vertex list via the shoelace formula.
double oracle_polygon_equal_area_radius(const std::vector<double>& xs,
                                        const std::vector<double>& ys) {
  double twice_area = 0.0;
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    twice_area += xs[i] * ys[j] - xs[j] * ys[i];
  }
  return std::sqrt(std::abs(twice_area) / 2.0 / kPi);
}

// Contact patch rim on the dome for a sphere pressed at the apex: the dome
// point at polar angle theta is displaced iff it lies inside the indenter
// ball. Solving |dome(theta) - ball_center| = r gives the rim angle; the
// oracle reports its distance from the symmetry axis.
double oracle_apex_footprint_radius(double dome_r, double ball_r, double depth) {
  const double m = dome_r + ball_r - depth;  // ball center height above dome center
  const double cos_rim =
      (dome_r * dome_r + m * m - ball_r * ball_r) / (2.0 * dome_r * m);
  return dome_r * std::sin(std::acos(cos_rim));
}

// Sphere cap chord on a flat plane, the near-flat approximation of the above.
double oracle_flat_footprint_radius(double ball_r, double depth) {
  return std::sqrt(depth * (2.0 * ball_r - depth));
}

// ----------------------------------------------------------------------------

const geometry::ShellGeometry kGeom{};
constexpr double kApex = 1.0;

double transverse_radius(const Vec3& p, const Vec3& apex) {
  return std::hypot(p.x - apex.x, p.y - apex.y);
}

}  // namespace

TEST_CASE("equivalent radius matches shoelace-area oracle") {
  const double e_sq = 6.0;
  std::vector<double> sx{e_sq / 2, -e_sq / 2, -e_sq / 2, e_sq / 2};
  std::vector<double> sy{e_sq / 2, e_sq / 2, -e_sq / 2, -e_sq / 2};
  CHECK(Indenter::square(e_sq).equivalent_radius() ==
        doctest::Approx(oracle_polygon_equal_area_radius(sx, sy)).epsilon(1e-12));

  const double e_hex = 3.0;
  std::vector<double> hx, hy;
  for (int k = 0; k < 6; ++k) {
    hx.push_back(e_hex * std::cos(k * kPi / 3.0));
    hy.push_back(e_hex * std::sin(k * kPi / 3.0));
  }
  CHECK(Indenter::hexagon(e_hex).equivalent_radius() ==
        doctest::Approx(oracle_polygon_equal_area_radius(hx, hy)).epsilon(1e-12));

  CHECK(Indenter::sphere(4.0).equivalent_radius() == 4.0);
  CHECK(Indenter::ellipse(4.0, 2.0).equivalent_radius() ==
        doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("indenter descriptors round trip") {
  for (const auto& ind : default_indenters()) {
    const auto back = Indenter::parse(ind.descriptor());
    CHECK(back == ind);
  }
  CHECK_THROWS_AS(Indenter::parse("cone:3"), std::invalid_argument);
  CHECK_THROWS_AS(Indenter::parse("sphere"), std::invalid_argument);
  CHECK_THROWS_AS(Indenter::parse("ellipse:4"), std::invalid_argument);
  CHECK_THROWS_AS(Indenter::sphere(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Indenter::ellipse(4.0, -1.0), std::invalid_argument);
}

TEST_CASE("zero depth gives zero load") {
  for (const auto& ind : default_indenters()) {
    ContactSpec spec;
    spec.depth = 0.0;
    spec.slip_x = 1.0;
    spec.twist = 0.3;
    const auto [f, tau] = contact_load(ind, spec);
    CHECK(f.x == 0.0);
    CHECK(f.y == 0.0);
    CHECK(f.z == 0.0);
    CHECK(tau == 0.0);
  }
}

TEST_CASE("normal load hits the range cap for a 3 mm sphere at 2 mm") {
  ContactSpec spec;
  spec.depth = 2.0;
  const auto [f, tau] = contact_load(Indenter::sphere(3.0), spec);
  CHECK(f.z == doctest::Approx(-oracle_normal_force(3.0, 2.0)).epsilon(1e-12));
  CHECK(std::abs(f.z + 12.0) < 1e-9);
  CHECK(tau == 0.0);
}

TEST_CASE("tangential load below the friction cap matches the closed form") {
  ContactSpec spec;
  spec.depth = 1.0;
  spec.slip_x = 1.0;
  const auto [f, tau] = contact_load(Indenter::sphere(3.0), spec);
  CHECK(f.x == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(f.y == 0.0);
  const double cap = oracle_normal_force(3.0, 1.0);
  CHECK(cap == doctest::Approx(4.242640687).epsilon(1e-9));
  CHECK(std::abs(f.x) < cap);
}

TEST_CASE("friction cap clamps large slips") {
  ContactSpec spec;
  spec.depth = 1.0;
  spec.slip_x = 8.0;
  spec.slip_y = -6.0;
  const auto [f, tau] = contact_load(Indenter::sphere(3.0), spec);
  const double cap = oracle_normal_force(3.0, 1.0);
  CHECK(std::hypot(f.x, f.y) == doctest::Approx(cap).epsilon(1e-12));
  CHECK(f.x / f.y == doctest::Approx(8.0 / -6.0).epsilon(1e-12));
}

TEST_CASE("torque cap clamps large twists") {
  ContactSpec spec;
  spec.depth = 2.0;
  spec.twist = 0.5;
  const auto [f, tau] = contact_load(Indenter::sphere(3.0), spec);
  const double patch = oracle_flat_footprint_radius(3.0, 2.0);
  const double cap = (2.0 / 3.0) * oracle_normal_force(3.0, 2.0) * patch / 1000.0;
  CHECK(tau == doctest::Approx(cap).epsilon(1e-12));
  CHECK(0.042 * 0.5 * 4.0 > cap);
}

TEST_CASE("load is exactly odd in slip and twist") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    ContactSpec spec;
    spec.depth = rng.uniform(0.0, 2.0);
    spec.slip_x = rng.uniform(-3.0, 3.0);
    spec.slip_y = rng.uniform(-3.0, 3.0);
    spec.twist = rng.uniform(-0.5, 0.5);
    ContactSpec flipped = spec;
    flipped.slip_x = -spec.slip_x;
    flipped.slip_y = -spec.slip_y;
    flipped.twist = -spec.twist;
    const auto [f, tau] = contact_load(Indenter::sphere(4.0), spec);
    const auto [g, sigma] = contact_load(Indenter::sphere(4.0), flipped);
    CHECK(g.x == -f.x);
    CHECK(g.y == -f.y);
    CHECK(g.z == f.z);
    CHECK(sigma == -tau);
  }
}

TEST_CASE("load is continuous in depth") {
  const auto ind = Indenter::hexagon(3.0);
  ContactSpec spec;
  spec.slip_x = 1.0;
  spec.twist = 0.2;
  double prev = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    spec.depth = 2.0 * i / 2000.0;
    const auto [f, tau] = contact_load(ind, spec);
    const double mag = f.norm() + std::abs(tau);
    CHECK(std::abs(mag - prev) < 0.02);
    prev = mag;
  }
}

TEST_CASE("negative depth is rejected") {
  ContactSpec spec;
  spec.depth = -0.1;
  CHECK_THROWS_AS(contact_load(Indenter::sphere(3.0), spec), std::domain_error);
  CHECK_THROWS_AS(displacement_field(kGeom, Indenter::sphere(3.0), spec),
                  std::domain_error);
}

TEST_CASE("max depth keeps the normal load inside range") {
  CHECK(Indenter::sphere(3.0).max_depth() == doctest::Approx(2.0).epsilon(1e-12));
  for (const auto& ind : default_indenters()) {
    const double d = ind.max_depth();
    CHECK(d <= 3.0);
    CHECK(oracle_normal_force(ind.equivalent_radius(), d) <= 12.0 + 1e-9);
  }
}

TEST_CASE("zero depth gives an identically zero field") {
  ContactSpec spec;
  spec.u = 1.0;
  spec.axial = 0.7;
  spec.depth = 0.0;
  const auto f = displacement_field(kGeom, Indenter::sphere(3.0), spec, 64, 32);
  CHECK(f.max_inward == 0.0);
  for (double v : f.inward) CHECK(v == 0.0);
  for (double v : f.stick) CHECK(v == 0.0);
  CHECK_FALSE(f.clipped);
}

TEST_CASE("apex press peaks at the contact depth") {
  ContactSpec spec;
  spec.axial = kApex;
  spec.depth = 1.0;
  const auto f = displacement_field(kGeom, Indenter::sphere(3.0), spec);
  CHECK(f.max_inward == doctest::Approx(1.0).epsilon(1e-6));
  const std::size_t apex_row = static_cast<std::size_t>(f.res_axial - 1) * f.res_u;
  CHECK(f.inward[apex_row] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(f.clipped);
}

TEST_CASE("apex footprint rim matches the dome-cap oracle") {
  ContactSpec spec;
  spec.axial = kApex;
  spec.depth = 1.0;
  const auto f = displacement_field(kGeom, Indenter::sphere(3.0), spec);
  const auto& grid = geometry::shared_surface_grid(kGeom, f.res_u, f.res_axial);
  const Vec3 axis{0.0, 0.0, 0.0};

  double measured = 0.0;
  for (std::size_t k = 0; k < f.footprint.size(); ++k)
    if (f.footprint[k])
      measured = std::max(measured, std::hypot(grid.positions[k].x, grid.positions[k].y));

  const double rim = oracle_apex_footprint_radius(kGeom.hemisphere_radius, 3.0, 1.0);
  CHECK(measured <= rim + 1e-9);
  CHECK(measured >= rim - 0.15);
  // The flat-surface chord estimate sqrt(2*r*d - d^2) overshoots the curved
  // dome rim by the curvature of the shell, not by more.
  CHECK(std::abs(oracle_flat_footprint_radius(3.0, 1.0) - rim) < 0.25);
  (void)axis;
}

TEST_CASE("flat square face presses its full footprint") {
  ContactSpec spec;
  spec.axial = kApex;
  spec.depth = 1.0;
  const auto ind = Indenter::square(6.0);
  const auto f = displacement_field(kGeom, ind, spec);
  CHECK(f.max_inward == doctest::Approx(1.0).epsilon(1e-6));

  const auto& grid = geometry::shared_surface_grid(kGeom, f.res_u, f.res_axial);
  double max_tr = 0.0;
  for (std::size_t k = 0; k < f.footprint.size(); ++k)
    if (f.footprint[k])
      max_tr = std::max(max_tr, std::hypot(grid.positions[k].x, grid.positions[k].y));
  // Corners sit half a diagonal out; the dome drop there (~0.78 mm) stays
  // inside the 1 mm press, so the whole face is in contact.
  const double corner = 6.0 * std::numbers::sqrt2 / 2.0;
  CHECK(max_tr <= corner + 1e-6);
  CHECK(max_tr >= corner - 0.30);
}

TEST_CASE("footprint displacement jumps stay small across the grid") {
  ContactSpec spec;
  spec.axial = kApex;
  spec.depth = 1.0;
  const auto f = displacement_field(kGeom, Indenter::sphere(3.0), spec);
  double worst = 0.0;
  for (int j = 0; j + 1 < f.res_axial; ++j)
    for (int i = 0; i < f.res_u; ++i) {
      const double v = f.inward[f.index(i, j)];
      worst = std::max(worst, std::abs(v - f.inward[f.index((i + 1) % f.res_u, j)]));
      worst = std::max(worst, std::abs(v - f.inward[f.index(i, j + 1)]));
    }
  CHECK(worst < 0.3);
}

TEST_CASE("skirt vanishes beyond its reach and decays monotonically") {
  ContactSpec spec;
  spec.axial = kApex;
  spec.depth = 1.0;
  const auto ind = Indenter::square(6.0);
  const auto f = displacement_field(kGeom, ind, spec);
  const double L = kGeom.meridian_length();
  // The footprint stays inside the corner circle of the square face, so any
  // node whose apex arc exceeds the corner arc by the skirt reach is at
  // least that far from every rim node.
  const double corner = 6.0 * std::numbers::sqrt2 / 2.0;
  const double rim_arc =
      kGeom.hemisphere_radius * std::asin(corner / kGeom.hemisphere_radius);

  int skirt_nodes = 0;
  for (int j = 0; j < f.res_axial; ++j) {
    const double axial = static_cast<double>(j) / (f.res_axial - 1);
    const double arc_from_apex = (1.0 - axial) * L;
    for (int i = 0; i < f.res_u; ++i) {
      const std::size_t k = f.index(i, j);
      if (f.footprint[k]) {
        CHECK(f.stick[k] == 1.0);
        continue;
      }
      if (f.stick[k] > 0.0) ++skirt_nodes;
      if (arc_from_apex - rim_arc > skirt_reach + 0.2) {
        CHECK(f.inward[k] == 0.0);
        CHECK(f.stick[k] == 0.0);
      }
    }
  }
  CHECK(skirt_nodes > 0);

  // Walking down the meridian away from the footprint, stick never grows.
  const int i0 = 0;
  double prev = 1.0;
  bool outside = false;
  for (int j = f.res_axial - 1; j >= 0; --j) {
    const std::size_t k = f.index(i0, j);
    if (f.footprint[k]) continue;
    outside = true;
    CHECK(f.stick[k] <= prev + 1e-12);
    prev = f.stick[k];
  }
  CHECK(outside);
}

TEST_CASE("skirt carries the rim displacement of flat faces") {
  ContactSpec spec;
  spec.axial = kApex;
  spec.depth = 1.0;
  const auto f = displacement_field(kGeom, Indenter::square(6.0), spec);
  // Just outside the footprint the bulge should be close to the rim
  // penetration, which is depth minus the dome drop at the face edge
  // (9/24 mm at the edge midline).
  double best = 0.0;
  for (int j = 0; j < f.res_axial; ++j)
    for (int i = 0; i < f.res_u; ++i) {
      const std::size_t k = f.index(i, j);
      if (!f.footprint[k]) best = std::max(best, f.inward[k]);
    }
  CHECK(best > 0.3);
  CHECK(best < 1.0);
}

TEST_CASE("base-rim contact sets the clipped flag") {
  ContactSpec spec;
  spec.u = 0.5;
  spec.axial = 0.02;
  spec.depth = 1.0;
  const auto f = displacement_field(kGeom, Indenter::square(6.0), spec);
  CHECK(f.clipped);

  ContactSpec apex;
  apex.axial = kApex;
  apex.depth = 1.0;
  CHECK_FALSE(displacement_field(kGeom, Indenter::square(6.0), apex).clipped);
}

TEST_CASE("bilinear sampling reproduces node values and wraps in azimuth") {
  ContactSpec spec;
  spec.u = 0.3;
  spec.axial = 0.9;
  spec.depth = 1.2;
  const auto f = displacement_field(kGeom, Indenter::sphere(4.0), spec);
  for (int j : {0, f.res_axial / 2, f.res_axial - 1}) {
    for (int i : {0, 1, f.res_u / 3, f.res_u - 1}) {
      const double u = 2.0 * kPi * i / f.res_u;
      const double axial = static_cast<double>(j) / (f.res_axial - 1);
      CHECK(f.inward_at(u, axial) ==
            doctest::Approx(f.inward[f.index(i, j)]).epsilon(1e-12));
    }
  }
  CHECK(f.inward_at(2.0 * kPi, 0.9) == doctest::Approx(f.inward_at(0.0, 0.9)));
  CHECK(f.inward_at(-2.0 * kPi + 0.3, 0.9) == doctest::Approx(f.inward_at(0.3, 0.9)));
}

TEST_CASE("coarse grids are rejected") {
  ContactSpec spec;
  spec.depth = 1.0;
  CHECK_THROWS_AS(displacement_field(kGeom, Indenter::sphere(3.0), spec, 4, 4),
                  std::invalid_argument);
}

TEST_CASE("press episodes ramp depth monotonically from zero") {
  const auto ep = make_episode(1.0, 0.8, EpisodeMode::Press, 1.5, 10, 99);
  REQUIRE(ep.frames.size() == 10);
  CHECK(ep.frames.front().depth == 0.0);
  CHECK(ep.frames.back().depth == doctest::Approx(1.5).epsilon(1e-12));
  for (std::size_t i = 1; i < ep.frames.size(); ++i) {
    CHECK(ep.frames[i].depth > ep.frames[i - 1].depth);
    CHECK(ep.frames[i].slip_x == 0.0);
    CHECK(ep.frames[i].twist == 0.0);
  }
}

TEST_CASE("twist episodes hold depth and sweep both twist signs") {
  const auto ep = make_episode(2.0, 0.5, EpisodeMode::Twist, 0.4, 12, 7);
  REQUIRE(ep.frames.size() == 12);
  CHECK(ep.frames.front().depth == 0.0);
  double held = ep.frames.back().depth;
  CHECK(held >= load::hold_depth_min);
  CHECK(held <= load::hold_depth_max);
  double max_twist = 0.0, min_twist = 0.0;
  for (const auto& s : ep.frames) {
    CHECK(s.u == 2.0);
    CHECK(s.axial == 0.5);
    if (s.twist != 0.0) CHECK(s.depth == held);
    max_twist = std::max(max_twist, s.twist);
    min_twist = std::min(min_twist, s.twist);
  }
  CHECK(max_twist > 0.15);
  CHECK(min_twist < -0.15);
  CHECK(max_twist <= 0.4 + 1e-12);
}

TEST_CASE("tilt episodes slip along one tangent direction") {
  const auto ep = make_episode(0.3, 0.6, EpisodeMode::Tilt, 1.0, 12, 11);
  double dx = 0.0, dy = 0.0;
  for (const auto& s : ep.frames) {
    if (s.slip_x != 0.0 || s.slip_y != 0.0) {
      if (dx == 0.0 && dy == 0.0) {
        const double n = std::hypot(s.slip_x, s.slip_y);
        dx = s.slip_x / n;
        dy = s.slip_y / n;
      }
      CHECK(std::abs(s.slip_x * dy - s.slip_y * dx) < 1e-12);
    }
    CHECK(s.twist == 0.0);
  }
  CHECK(std::hypot(dx, dy) == doctest::Approx(1.0));
}

TEST_CASE("episodes are deterministic in their seed") {
  const auto a = make_episode(1.0, 0.7, EpisodeMode::Tilt, 1.2, 10, 1234);
  const auto b = make_episode(1.0, 0.7, EpisodeMode::Tilt, 1.2, 10, 1234);
  const auto c = make_episode(1.0, 0.7, EpisodeMode::Tilt, 1.2, 10, 1235);
  REQUIRE(a.frames.size() == b.frames.size());
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    same = same && std::memcmp(&a.frames[i], &b.frames[i], sizeof(ContactSpec)) == 0;
    differs = differs ||
              std::memcmp(&a.frames[i], &c.frames[i], sizeof(ContactSpec)) != 0;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("out-of-range episode magnitudes are rejected") {
  CHECK_THROWS_AS(make_episode(0, 1, EpisodeMode::Press, 3.5, 10, 0),
                  std::domain_error);
  CHECK_THROWS_AS(make_episode(0, 1, EpisodeMode::Tilt, 3.0, 10, 0),
                  std::domain_error);
  CHECK_THROWS_AS(make_episode(0, 1, EpisodeMode::Twist, 0.6, 10, 0),
                  std::domain_error);
  CHECK_THROWS_AS(make_episode(0, 1, EpisodeMode::Press, -1.0, 10, 0),
                  std::domain_error);
  CHECK_THROWS_AS(make_episode(0, 1, EpisodeMode::Press, 1.0, 1, 0),
                  std::invalid_argument);
}

TEST_CASE("episode labels start at zero and press forces grow strictly") {
  const auto inds = default_indenters();
  const auto ep = make_episode(0.4, 0.9, EpisodeMode::Press, 1.8, 10, 5);
  const auto states = episode_states(kGeom, ep, inds[0]);
  REQUIRE(states.size() == 10);
  CHECK(states.front().second.force.norm() == 0.0);
  CHECK(states.front().second.torque == 0.0);
  for (std::size_t i = 1; i < states.size(); ++i) {
    CHECK(states[i].second.force.x == 0.0);
    CHECK(states[i].second.force.y == 0.0);
    CHECK(states[i].second.torque == 0.0);
    CHECK(states[i].second.force.z < states[i - 1].second.force.z);
  }
  const auto sp = geometry::surface_point(kGeom, 0.4, 0.9);
  CHECK((states[3].second.position - sp.position).norm() == 0.0);
}

TEST_CASE("a thousand random episodes stay inside the label ranges") {
  const auto inds = default_indenters();
  const auto points = geometry::sample_surface(kGeom, 1000, 2024);
  Rng rng(derive_seed(2024, 0xAB));
  int states_checked = 0;
  for (int e = 0; e < 1000; ++e) {
    const auto& pt = points[e];
    const auto& ind = inds[e % inds.size()];
    const auto mode = static_cast<EpisodeMode>(e % 3);
    double magnitude = 0.0;
    switch (mode) {
      case EpisodeMode::Press:
        magnitude = rng.uniform(0.15, 0.98) * ind.max_depth();
        break;
      case EpisodeMode::Tilt:
        magnitude = rng.uniform(0.1, 0.95) * load::tilt_slip_limit;
        break;
      case EpisodeMode::Twist:
        magnitude = rng.uniform(0.1, 0.95) * load::twist_angle_limit;
        break;
    }
    const auto ep = make_episode(pt.u, pt.axial, mode, magnitude, 10,
                                 derive_seed(77, static_cast<uint64_t>(e)));
    for (const auto& [spec, state] : episode_states(kGeom, ep, ind)) {
      ++states_checked;
      CHECK(spec.depth >= 0.0);
      CHECK(spec.depth <= 3.0);
      CHECK(state.force.z >= -12.0);
      CHECK(state.force.z <= 0.8);
      CHECK(std::abs(state.force.x) <= 5.0);
      CHECK(std::abs(state.force.y) <= 5.0);
      CHECK(std::abs(state.torque) <= 0.05);
    }
  }
  CHECK(states_checked == 10000);
}
