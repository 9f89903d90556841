#include "tactsim/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "tactsim/rng.hpp"

namespace tactsim::mech {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

// Prism cross-section in contact-frame (x, y), containing the origin.
struct CrossSection {
  struct Plane {
    double nx, ny, c;  // inside means nx*x + ny*y <= c
  };
  std::vector<Plane> planes;
  bool is_ellipse = false;
  double inv_a = 0.0, inv_b = 0.0;

  bool contains(double x, double y) const {
    if (is_ellipse) {
      const double ex = x * inv_a, ey = y * inv_b;
      return ex * ex + ey * ey <= 1.0;
    }
    for (const auto& pl : planes)
      if (pl.nx * x + pl.ny * y > pl.c) return false;
    return true;
  }

  // Ray-exit parameter from inside the section along (mx, my).
  double exit(double x, double y, double mx, double my) const {
    if (is_ellipse) {
      const double dx = mx * inv_a, dy = my * inv_b;
      const double px = x * inv_a, py = y * inv_b;
      const double a = dx * dx + dy * dy;
      if (a <= 0.0) return kInf;
      const double b = px * dx + py * dy;
      const double c = px * px + py * py - 1.0;
      const double disc = b * b - a * c;
      if (disc < 0.0) return kInf;
      return (-b + std::sqrt(disc)) / a;
    }
    double best = kInf;
    for (const auto& pl : planes) {
      const double along = pl.nx * mx + pl.ny * my;
      if (along <= 0.0) continue;
      best = std::min(best, (pl.c - (pl.nx * x + pl.ny * y)) / along);
    }
    return best;
  }
};

CrossSection cross_section(const Indenter& ind) {
  CrossSection cs;
  switch (ind.shape) {
    case Indenter::Shape::Square: {
      const double h = ind.dim_a / 2.0;
      cs.planes = {{1, 0, h}, {-1, 0, h}, {0, 1, h}, {0, -1, h}};
      break;
    }
    case Indenter::Shape::Hexagon: {
      const double apothem = ind.dim_a * std::sqrt(3.0) / 2.0;
      for (int k = 0; k < 6; ++k) {
        const double ang = kPi / 6.0 + k * kPi / 3.0;
        cs.planes.push_back({std::cos(ang), std::sin(ang), apothem});
      }
      break;
    }
    case Indenter::Shape::Ellipse:
      cs.is_ellipse = true;
      cs.inv_a = 1.0 / ind.dim_a;
      cs.inv_b = 1.0 / ind.dim_b;
      break;
    case Indenter::Shape::Sphere:
      break;
  }
  return cs;
}

double grid_bilinear(const std::vector<double>& values, int res_u, int res_axial,
                     double u, double axial) {
  if (values.empty()) return 0.0;
  double su = u / (2.0 * kPi) * res_u;
  su -= std::floor(su / res_u) * res_u;
  int i0 = static_cast<int>(su);
  if (i0 >= res_u) i0 = 0;
  const double fu = su - i0;
  const int i1 = (i0 + 1) % res_u;

  const double sa = std::clamp(axial, 0.0, 1.0) * (res_axial - 1);
  int j0 = std::min(static_cast<int>(sa), res_axial - 2);
  const double fa = sa - j0;

  const auto at = [&](int i, int j) {
    return values[static_cast<std::size_t>(j) * res_u + i];
  };
  const double lo = at(i0, j0) * (1.0 - fu) + at(i1, j0) * fu;
  const double hi = at(i0, j0 + 1) * (1.0 - fu) + at(i1, j0 + 1) * fu;
  return lo * (1.0 - fa) + hi * fa;
}

// 0 -> +1 -> -1 -> 0 over p in [0, 1].
double triangle_wave(double p) {
  if (p < 0.25) return 4.0 * p;
  if (p < 0.75) return 2.0 - 4.0 * p;
  return 4.0 * p - 4.0;
}

}  // namespace

Indenter Indenter::sphere(double radius) {
  require_positive(radius, "sphere radius");
  return {Shape::Sphere, radius, 0.0};
}

Indenter Indenter::square(double edge) {
  require_positive(edge, "square edge");
  return {Shape::Square, edge, 0.0};
}

Indenter Indenter::hexagon(double edge) {
  require_positive(edge, "hexagon edge");
  return {Shape::Hexagon, edge, 0.0};
}

Indenter Indenter::ellipse(double semi_a, double semi_b) {
  require_positive(semi_a, "ellipse semi-axis");
  require_positive(semi_b, "ellipse semi-axis");
  return {Shape::Ellipse, semi_a, semi_b};
}

double Indenter::equivalent_radius() const {
  switch (shape) {
    case Shape::Sphere:
      return dim_a;
    case Shape::Square:
      return std::sqrt(dim_a * dim_a / kPi);
    case Shape::Hexagon:
      return std::sqrt(1.5 * std::sqrt(3.0) * dim_a * dim_a / kPi);
    case Shape::Ellipse:
      return std::sqrt(dim_a * dim_b);
  }
  return 0.0;
}

double Indenter::footprint_radius(double depth) const {
  if (shape == Shape::Sphere)
    return std::sqrt(std::max(0.0, depth * (2.0 * dim_a - depth)));
  return equivalent_radius();
}

double Indenter::max_depth() const {
  const double cap = -load::min_normal_force;
  const double d = std::pow(cap / (load::k_normal * std::sqrt(equivalent_radius())),
                            2.0 / 3.0);
  return std::min(d, load::max_indent_depth);
}

std::string Indenter::descriptor() const {
  char buf[64];
  switch (shape) {
    case Shape::Sphere:
      std::snprintf(buf, sizeof buf, "sphere:%g", dim_a);
      break;
    case Shape::Square:
      std::snprintf(buf, sizeof buf, "square:%g", dim_a);
      break;
    case Shape::Hexagon:
      std::snprintf(buf, sizeof buf, "hexagon:%g", dim_a);
      break;
    case Shape::Ellipse:
      std::snprintf(buf, sizeof buf, "ellipse:%gx%g", dim_a, dim_b);
      break;
  }
  return buf;
}

Indenter Indenter::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("bad indenter descriptor: " + text);
  const std::string name = text.substr(0, colon);
  const std::string dims = text.substr(colon + 1);
  try {
    if (name == "sphere") return sphere(std::stod(dims));
    if (name == "square") return square(std::stod(dims));
    if (name == "hexagon") return hexagon(std::stod(dims));
    if (name == "ellipse") {
      const auto x = dims.find('x');
      if (x == std::string::npos) throw std::invalid_argument(text);
      return ellipse(std::stod(dims.substr(0, x)), std::stod(dims.substr(x + 1)));
    }
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("bad indenter descriptor: " + text);
  }
  throw std::invalid_argument("unknown indenter shape: " + name);
}

std::vector<Indenter> default_indenters() {
  return {Indenter::sphere(3.0),  Indenter::sphere(4.0),   Indenter::sphere(5.0),
          Indenter::square(6.0),  Indenter::hexagon(3.0),  Indenter::ellipse(4.0, 2.0)};
}

std::pair<Vec3, double> contact_load(const Indenter& ind, const ContactSpec& spec) {
  if (spec.depth < 0.0) throw std::domain_error("contact depth must be >= 0");
  const double d = spec.depth;
  const double fn =
      load::k_normal * std::sqrt(ind.equivalent_radius()) * d * std::sqrt(d);

  double fx = load::k_tangential * spec.slip_x * d;
  double fy = load::k_tangential * spec.slip_y * d;
  const double shear_cap = load::friction * fn;
  const double shear = std::hypot(fx, fy);
  if (shear > shear_cap) {
    const double scale = shear_cap / shear;
    fx *= scale;
    fy *= scale;
  }

  const double torque_cap =
      (2.0 / 3.0) * load::friction * fn * ind.footprint_radius(d) / 1000.0;
  const double torque =
      std::clamp(load::k_torsion * spec.twist * d * d, -torque_cap, torque_cap);

  return {Vec3{fx, fy, -fn}, torque};
}

double DisplacementField::inward_at(double u, double axial) const {
  return grid_bilinear(inward, res_u, res_axial, u, axial);
}

double DisplacementField::stick_at(double u, double axial) const {
  return grid_bilinear(stick, res_u, res_axial, u, axial);
}

DisplacementField displacement_field(const geometry::ShellGeometry& geom,
                                     const Indenter& ind, const ContactSpec& spec,
                                     int res_u, int res_axial) {
  if (spec.depth < 0.0) throw std::domain_error("contact depth must be >= 0");
  if (res_u < 8 || res_axial < 8)
    throw std::invalid_argument("displacement grid must be at least 8x8");

  DisplacementField f;
  f.res_u = res_u;
  f.res_axial = res_axial;
  const std::size_t n = static_cast<std::size_t>(res_u) * res_axial;
  f.inward.assign(n, 0.0);
  f.stick.assign(n, 0.0);
  f.footprint.assign(n, 0);
  if (spec.depth == 0.0) return f;

  const auto& grid = geometry::shared_surface_grid(geom, res_u, res_axial);
  const auto center = geometry::surface_point(geom, spec.u, spec.axial);
  const auto frame = geometry::contact_frame(center);
  const double d = spec.depth;

  if (ind.shape == Indenter::Shape::Sphere) {
    const double r = ind.dim_a;
    const Vec3 q = center.position + center.normal * (r - d);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec3 w = grid.positions[k] - q;
      const double w2 = w.norm2();
      if (w2 > r * r) continue;
      const double b = w.dot(grid.normals[k]);
      f.inward[k] = b + std::sqrt(b * b - w2 + r * r);
    }
  } else {
    const CrossSection cs = cross_section(ind);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec3 xi = frame.axes.transposed_mul(grid.positions[k] - center.position);
      if (xi.z < -d) continue;
      if (!cs.contains(xi.x, xi.y)) continue;
      const Vec3 m = frame.axes.transposed_mul(-grid.normals[k]);
      const double s_face = m.z < 0.0 ? (xi.z + d) / (-m.z) : kInf;
      const double s_side = cs.exit(xi.x, xi.y, m.x, m.y);
      const double pen = std::min(s_face, s_side);
      if (pen > 0.0 && pen < kInf) f.inward[k] = pen;
    }
  }

  bool any = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (f.inward[k] > 0.0) {
      f.footprint[k] = 1;
      f.max_inward = std::max(f.max_inward, f.inward[k]);
      any = true;
    }
  }
  if (!any) return f;
  for (int i = 0; i < res_u; ++i) {
    if (f.footprint[f.index(i, 0)]) {
      f.clipped = true;
      break;
    }
  }

  // Gaussian skirt: geodesic distances from the footprint rim over the grid
  // graph, carrying the rim displacement of the nearest rim node.
  std::vector<double> dist(n, kInf);
  std::vector<double> amp(n, 0.0);
  using QItem = std::pair<double, std::size_t>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;

  const auto for_each_neighbor = [&](std::size_t k, auto&& fn) {
    const int i = static_cast<int>(k % res_u);
    const int j = static_cast<int>(k / res_u);
    for (int dj = -1; dj <= 1; ++dj) {
      const int nj = j + dj;
      if (nj < 0 || nj >= res_axial) continue;
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = (i + di + res_u) % res_u;
        fn(f.index(ni, nj));
      }
    }
  };

  for (std::size_t k = 0; k < n; ++k) {
    if (!f.footprint[k]) continue;
    bool rim = false;
    for_each_neighbor(k, [&](std::size_t nb) {
      if (!f.footprint[nb]) rim = true;
    });
    if (rim) {
      dist[k] = 0.0;
      amp[k] = f.inward[k];
      pq.emplace(0.0, k);
    }
  }

  while (!pq.empty()) {
    const auto [dv, v] = pq.top();
    pq.pop();
    if (dv > dist[v] || dv > skirt_reach) continue;
    for_each_neighbor(v, [&](std::size_t nb) {
      if (f.footprint[nb]) return;
      const double cand = dv + (grid.positions[nb] - grid.positions[v]).norm();
      if (cand < dist[nb]) {
        dist[nb] = cand;
        amp[nb] = amp[v];
        pq.emplace(cand, nb);
      }
    });
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (f.footprint[k]) {
      f.stick[k] = 1.0;
    } else if (dist[k] <= skirt_reach) {
      const double g = dist[k] / skirt_sigma;
      const double factor = std::exp(-g * g);
      f.inward[k] = amp[k] * factor;
      f.stick[k] = factor;
    }
  }
  return f;
}

std::string mode_name(EpisodeMode mode) {
  switch (mode) {
    case EpisodeMode::Press:
      return "press";
    case EpisodeMode::Tilt:
      return "tilt";
    case EpisodeMode::Twist:
      return "twist";
  }
  return "press";
}

EpisodeMode parse_mode(const std::string& name) {
  if (name == "press") return EpisodeMode::Press;
  if (name == "tilt") return EpisodeMode::Tilt;
  if (name == "twist") return EpisodeMode::Twist;
  throw std::invalid_argument("unknown episode mode: " + name);
}

Episode make_episode(double u, double axial, EpisodeMode mode, double magnitude,
                     int frames, std::uint64_t seed) {
  if (frames < 2) throw std::invalid_argument("episode needs at least 2 frames");
  if (!(magnitude > 0.0)) throw std::domain_error("episode magnitude must be > 0");
  switch (mode) {
    case EpisodeMode::Press:
      if (magnitude > load::max_indent_depth)
        throw std::domain_error("press depth exceeds the 3 mm depth range");
      break;
    case EpisodeMode::Tilt:
      if (magnitude > load::tilt_slip_limit)
        throw std::domain_error("tilt slip would exceed the tangential force range");
      break;
    case EpisodeMode::Twist:
      if (magnitude > load::twist_angle_limit)
        throw std::domain_error("twist angle would exceed the torque range");
      break;
  }

  Episode ep;
  ep.u = u;
  ep.axial = axial;
  ep.mode = mode;
  ep.magnitude = magnitude;
  ep.seed = seed;
  ep.frames.reserve(frames);

  if (mode == EpisodeMode::Press) {
    for (int i = 0; i < frames; ++i) {
      ContactSpec s;
      s.u = u;
      s.axial = axial;
      s.depth = magnitude * i / (frames - 1);
      ep.frames.push_back(s);
    }
    return ep;
  }

  Rng rng(derive_seed(seed, 0xE715ULL, 0x0DE5ULL));
  const double hold = rng.uniform(load::hold_depth_min, load::hold_depth_max);
  double dir_x = 1.0, dir_y = 0.0;
  if (mode == EpisodeMode::Tilt) {
    const double ang = rng.uniform(0.0, 2.0 * kPi);
    dir_x = std::cos(ang);
    dir_y = std::sin(ang);
  }

  const int approach = std::max(2, frames / 3);
  for (int i = 0; i < frames; ++i) {
    ContactSpec s;
    s.u = u;
    s.axial = axial;
    if (i < approach) {
      s.depth = hold * i / (approach - 1);
    } else {
      s.depth = hold;
      const double p = static_cast<double>(i - approach + 1) / (frames - approach);
      const double w = magnitude * triangle_wave(p);
      if (mode == EpisodeMode::Tilt) {
        s.slip_x = w * dir_x;
        s.slip_y = w * dir_y;
      } else {
        s.twist = w;
      }
    }
    ep.frames.push_back(s);
  }
  return ep;
}

std::vector<std::pair<ContactSpec, ContactState>> episode_states(
    const geometry::ShellGeometry& geom, const Episode& episode, const Indenter& ind) {
  const auto sp = geometry::surface_point(geom, episode.u, episode.axial);
  std::vector<std::pair<ContactSpec, ContactState>> out;
  out.reserve(episode.frames.size());
  for (const auto& spec : episode.frames) {
    const auto [force, torque] = contact_load(ind, spec);
    ContactState state;
    state.position = sp.position;
    state.force = force;
    state.torque = torque;
    out.emplace_back(spec, state);
  }
  return out;
}

}  // namespace tactsim::mech
