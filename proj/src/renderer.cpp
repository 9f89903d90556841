#include "tactsim/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tactsim/rng.hpp"

namespace tactsim::render {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMarchStep = 0.25;  // mm
constexpr int kBisectIters = 30;

double ipow(double base, int exp) {
  double out = 1.0;
  while (exp > 0) {
    if (exp & 1) out *= base;
    base *= base;
    exp >>= 1;
  }
  return out;
}

double wrap_angle(double x) {
  x = std::fmod(x, kTwoPi);
  if (x < 0.0) x += kTwoPi;
  return x;
}

// Signed offset from the undeformed shell along the local normal direction.
// Exact for the wall and dome regions, continuous across the seam.
double shell_offset(const geometry::ShellGeometry& geom, const Vec3& p) {
  if (p.z <= geom.cyl_height) return std::hypot(p.x, p.y) - geom.cyl_radius;
  const double dz = p.z - geom.cyl_height;
  return std::sqrt(p.x * p.x + p.y * p.y + dz * dz) - geom.hemisphere_radius;
}

void shell_uv(const geometry::ShellGeometry& geom, const Vec3& p, double& u,
              double& axial) {
  u = wrap_angle(std::atan2(p.y, p.x));
  const double len = geom.meridian_length();
  if (p.z <= geom.cyl_height) {
    axial = std::clamp(p.z, 0.0, geom.cyl_height) / len;
    return;
  }
  const double rho = std::hypot(p.x, p.y);
  const double lift = std::atan2(p.z - geom.cyl_height, rho);
  axial = std::min(1.0, (geom.cyl_height + geom.hemisphere_radius * lift) / len);
}

Vec3 analytic_outward(const geometry::ShellGeometry& geom, const Vec3& p) {
  if (p.z <= geom.cyl_height) {
    const double rho = std::hypot(p.x, p.y);
    if (rho <= 0.0) return {1.0, 0.0, 0.0};
    return {p.x / rho, p.y / rho, 0.0};
  }
  const Vec3 w{p.x, p.y, p.z - geom.cyl_height};
  return w.normalized();
}

// First intersection of a ray from inside with the undeformed shell.
bool undeformed_hit(const geometry::ShellGeometry& geom, const Vec3& o, const Vec3& d,
                    double& t_out) {
  const double R = geom.cyl_radius;
  const double a2 = d.x * d.x + d.y * d.y;
  if (a2 > 1e-16) {
    const double b = 2.0 * (o.x * d.x + o.y * d.y);
    const double c = o.x * o.x + o.y * o.y - R * R;
    const double disc = b * b - 4.0 * a2 * c;
    if (disc >= 0.0) {
      const double t = (-b + std::sqrt(disc)) / (2.0 * a2);
      const double z = o.z + t * d.z;
      if (t > 0.0 && z >= 0.0 && z <= geom.cyl_height) {
        t_out = t;
        return true;
      }
    }
  }
  const Vec3 w = o - Vec3{0.0, 0.0, geom.cyl_height};
  const double B = w.dot(d);
  const double disc = B * B - (w.dot(w) - geom.hemisphere_radius * geom.hemisphere_radius);
  if (disc < 0.0) return false;
  const double t = -B + std::sqrt(disc);
  if (t <= 0.0) return false;
  t_out = t;
  return true;
}

// Outward normals of the displaced node lattice, finite-differenced in the
// parameter directions. The apex row is degenerate (all nodes coincide), so
// it inherits the row below.
std::vector<Vec3> deformed_normals(const geometry::SurfaceGrid& grid,
                                   const std::vector<Vec3>& pos) {
  const int nu = grid.res_u;
  const int na = grid.res_axial;
  std::vector<Vec3> normals(pos.size());
  for (int j = 0; j + 1 < na; ++j) {
    const int jm = std::max(j - 1, 0);
    const int jp = j + 1;
    for (int i = 0; i < nu; ++i) {
      const int im = (i + nu - 1) % nu;
      const int ip = (i + 1) % nu;
      const Vec3 tu = pos[grid.index(ip, j)] - pos[grid.index(im, j)];
      const Vec3 ta = pos[grid.index(i, jp)] - pos[grid.index(i, jm)];
      Vec3 n = tu.cross(ta);
      const double len = n.norm();
      normals[grid.index(i, j)] = len > 1e-12 ? n / len : grid.normals[grid.index(i, j)];
    }
  }
  for (int i = 0; i < nu; ++i)
    normals[grid.index(i, na - 1)] = normals[grid.index(i, na - 2)];
  return normals;
}

Vec3 grid_normal_at(const geometry::SurfaceGrid& grid, const std::vector<Vec3>& normals,
                    double u, double axial) {
  const int nu = grid.res_u;
  const int na = grid.res_axial;
  const double su = wrap_angle(u) / kTwoPi * nu;
  const double sa = std::clamp(axial, 0.0, 1.0) * (na - 1);
  const int i0 = static_cast<int>(su) % nu;
  const int j0 = std::min(static_cast<int>(sa), na - 2);
  const double fu = su - std::floor(su);
  const double fa = sa - j0;
  const int i1 = (i0 + 1) % nu;
  const Vec3 n = normals[grid.index(i0, j0)] * ((1.0 - fu) * (1.0 - fa)) +
                 normals[grid.index(i1, j0)] * (fu * (1.0 - fa)) +
                 normals[grid.index(i0, j0 + 1)] * ((1.0 - fu) * fa) +
                 normals[grid.index(i1, j0 + 1)] * (fu * fa);
  const double len = n.norm();
  if (len <= 1e-12) return {0.0, 0.0, 1.0};
  return n / len;
}

// Bound, in (u, axial), on where the membrane deviates from its rest shape.
// Rays whose rest-surface hit lands outside can skip the march entirely.
struct BumpBox {
  bool active = false;
  double u_center = 0.0;
  double u_half = 0.0;
  double axial_lo = 1.0;
  double axial_hi = 0.0;

  bool contains(double u, double axial) const {
    if (!active) return false;
    if (axial < axial_lo || axial > axial_hi) return false;
    if (u_half >= kPi) return true;
    const double du = std::remainder(u - u_center, kTwoPi);
    return std::abs(du) <= u_half;
  }
};

BumpBox bump_box(const geometry::ShellGeometry& geom, const mech::DisplacementField& field,
                 const mech::ContactSpec& spec, double ray_margin) {
  BumpBox box;
  if (field.max_inward <= 0.0) return box;
  box.u_center = spec.u;
  double u_half = 0.0;
  double a_lo = 1.0, a_hi = 0.0;
  for (int j = 0; j < field.res_axial; ++j) {
    const double a = static_cast<double>(j) / (field.res_axial - 1);
    for (int i = 0; i < field.res_u; ++i) {
      if (field.inward[field.index(i, j)] <= 0.0) continue;
      const double u = kTwoPi * i / field.res_u;
      u_half = std::max(u_half, std::abs(std::remainder(u - spec.u, kTwoPi)));
      a_lo = std::min(a_lo, a);
      a_hi = std::max(a_hi, a);
    }
  }
  if (a_hi < a_lo) return box;
  box.active = true;
  const double arc_pad = ray_margin + 2.0;
  const double len = geom.meridian_length();
  box.axial_lo = std::max(0.0, a_lo - arc_pad / len);
  box.axial_hi = std::min(1.0, a_hi + arc_pad / len);
  // Horizontal radius shrinks toward the apex; pad azimuth with the smallest
  // radius in the padded band so the arc pad is conservative.
  double r_min = geom.cyl_radius;
  if (box.axial_hi * len > geom.cyl_height) {
    const double lift = (box.axial_hi * len - geom.cyl_height) / geom.hemisphere_radius;
    r_min = geom.hemisphere_radius * std::cos(std::min(lift, kPi / 2.0));
  }
  if (r_min < 1.0 || box.axial_hi >= 1.0 - 1e-9) {
    box.u_half = kPi + 1.0;
  } else {
    box.u_half = std::min(kPi + 1.0, u_half + arc_pad / r_min);
  }
  return box;
}

struct Shader {
  const SensorInstance* inst;
  std::vector<Vec3> led_pos;
  std::vector<Vec3> led_axis;
  std::vector<Vec3> led_tint;  // color * gain * intensity
  int beam_exp = 8;

  explicit Shader(const SensorInstance& instance) : inst(&instance) {
    const auto& leds = instance.leds;
    for (int k = 0; k < leds.count; ++k) {
      led_pos.push_back(leds.led_position(k));
      led_axis.push_back(leds.beam_axis(k));
      const double gain = k < static_cast<int>(instance.led_gains.size())
                              ? instance.led_gains[k]
                              : 1.0;
      led_tint.push_back(leds.led_color(k) * (gain * leds.intensity));
    }
    beam_exp = static_cast<int>(std::lround(leds.beam_exponent));
  }

  // Interior Blinn-Phong under the LED ring: diffuse term scaled by the
  // coating albedo, specular riding on top untinted.
  void shade(const Vec3& hit, const Vec3& n_inward, double albedo, double out[3]) const {
    const Vec3 view = (inst->camera.position - hit).normalized();
    double rgb[3] = {0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < led_pos.size(); ++k) {
      const Vec3 lvec = led_pos[k] - hit;
      const double d2 = lvec.dot(lvec);
      const Vec3 l = lvec / std::sqrt(d2);
      const double beam = ipow(std::max(0.0, -l.dot(led_axis[k])), beam_exp);
      if (beam <= 0.0) continue;
      const double lam = std::max(0.0, n_inward.dot(l));
      const Vec3 h = (l + view).normalized();
      const double spec = ipow(std::max(0.0, n_inward.dot(h)), 32);
      const double w = (albedo * lam + 0.2 * spec) * beam / d2;
      rgb[0] += led_tint[k].x * w;
      rgb[1] += led_tint[k].y * w;
      rgb[2] += led_tint[k].z * w;
    }
    for (int c = 0; c < 3; ++c) out[c] = rgb[c] * inst->rgb_balance[c];
  }
};

}  // namespace

std::vector<Vec3> displaced_marker_points(const geometry::ShellGeometry& geom,
                                          const SensorInstance& instance,
                                          const mech::DisplacementField& field,
                                          const mech::ContactSpec& spec) {
  std::vector<Vec3> pts;
  if (!instance.markers.enabled) return pts;
  pts.reserve(instance.marker_uv.size());
  const auto site = geometry::surface_point(geom, wrap_angle(spec.u),
                                            std::clamp(spec.axial, 0.0, 1.0));
  const auto frame = geometry::contact_frame(site);
  const Vec3 tan_x = frame.axes.col[0];
  const Vec3 tan_y = frame.axes.col[1];
  const Vec3 axis = frame.axes.col[2];
  for (const auto& [u, axial] : instance.marker_uv) {
    const auto sp = geometry::surface_point(geom, wrap_angle(u), std::clamp(axial, 0.0, 1.0));
    const double inward = field.inward_at(u, axial);
    const double stick = field.stick_at(u, axial);
    Vec3 p = sp.position - sp.normal * inward;
    p = p + (tan_x * spec.slip_x + tan_y * spec.slip_y) * stick;
    const double ang = stick * spec.twist;
    if (ang != 0.0) {
      const Vec3 rel = p - frame.origin;
      const double c = std::cos(ang), s = std::sin(ang);
      p = frame.origin + rel * c + axis.cross(rel) * s + axis * (axis.dot(rel) * (1.0 - c));
    }
    pts.push_back(p);
  }
  return pts;
}

TactileImage render(const geometry::ShellGeometry& geom, const SensorInstance& instance,
                    const mech::DisplacementField& field, const mech::ContactSpec& spec) {
  if (field.res_u < 256 || field.res_axial < 128)
    throw std::invalid_argument("displacement grid coarser than 256x128");

  const auto& cam = instance.camera;
  TactileImage out = img::Image8::make(cam.size, cam.size, 3);

  const bool deformed = field.max_inward > 0.0;
  const double ray_margin = 4.0 * field.max_inward + 1.0;
  const BumpBox box = bump_box(geom, field, spec, ray_margin);

  const geometry::SurfaceGrid* grid = nullptr;
  std::vector<Vec3> def_pos;
  std::vector<Vec3> def_normals;
  if (deformed) {
    grid = &geometry::shared_surface_grid(geom, field.res_u, field.res_axial);
    def_pos.resize(grid->positions.size());
    for (int j = 0; j < field.res_axial; ++j)
      for (int i = 0; i < field.res_u; ++i) {
        const std::size_t idx = grid->index(i, j);
        def_pos[idx] = grid->positions[idx] - grid->normals[idx] * field.inward[idx];
      }
    def_normals = deformed_normals(*grid, def_pos);
  }

  const std::vector<Vec3> markers =
      displaced_marker_points(geom, instance, field, spec);
  const double dot_r2 = instance.markers.dot_radius * instance.markers.dot_radius;

  const Shader shader(instance);
  const Vec3 origin = cam.position;

  for (int py = 0; py < cam.size; ++py) {
    for (int px = 0; px < cam.size; ++px) {
      const double cx = px + 0.5, cy = py + 0.5;
      if (!cam.inside_mask(cx, cy)) continue;
      const Vec3 dir = cam.pixel_ray(cx, cy);

      double t0 = 0.0;
      if (!undeformed_hit(geom, origin, dir, t0)) continue;

      Vec3 hit = origin + dir * t0;
      double u = 0.0, axial = 0.0;
      shell_uv(geom, hit, u, axial);
      Vec3 n_out;
      bool marched = false;

      if (deformed && box.contains(u, axial)) {
        double t_lo = std::max(0.0, t0 - ray_margin);
        auto level = [&](double t, double& tu, double& ta) {
          const Vec3 p = origin + dir * t;
          shell_uv(geom, p, tu, ta);
          return shell_offset(geom, p) + field.inward_at(tu, ta);
        };
        double tu = 0.0, ta = 0.0;
        while (t_lo > 0.0 && level(t_lo, tu, ta) >= 0.0) t_lo = std::max(0.0, t_lo - 2.0);
        double t_prev = t_lo;
        double t_cur = t_lo;
        double f_cur = level(t_cur, tu, ta);
        while (f_cur < 0.0) {
          t_prev = t_cur;
          t_cur += kMarchStep;
          f_cur = level(t_cur, tu, ta);
        }
        if (t_cur > t_prev) {
          double lo = t_prev, hi = t_cur;
          for (int it = 0; it < kBisectIters; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (level(mid, tu, ta) < 0.0)
              lo = mid;
            else
              hi = mid;
          }
          t_cur = hi;
        }
        hit = origin + dir * t_cur;
        shell_uv(geom, hit, u, axial);
        marched = field.inward_at(u, axial) > 0.0;
        n_out = marched ? grid_normal_at(*grid, def_normals, u, axial)
                        : analytic_outward(geom, hit);
      } else {
        n_out = analytic_outward(geom, hit);
      }

      double albedo = instance.coating_albedo;
      for (const Vec3& m : markers) {
        const Vec3 d = hit - m;
        if (std::abs(d.z) <= instance.markers.dot_radius && d.dot(d) <= dot_r2) {
          albedo = instance.markers.dot_albedo;
          break;
        }
      }

      double rgb[3];
      shader.shade(hit, n_out * -1.0, albedo, rgb);
      for (int c = 0; c < 3; ++c) {
        const long q = std::lround(std::clamp(rgb[c], 0.0, 1.0) * 255.0);
        out.at(px, py, c) = static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
      }
    }
  }
  return out;
}

const TactileImage& reference_image(const geometry::ShellGeometry& geom,
                                    const SensorInstance& instance) {
  if (!instance.reference_cache) {
    mech::DisplacementField zero;
    zero.res_u = 256;
    zero.res_axial = 128;
    zero.inward.assign(static_cast<std::size_t>(zero.res_u) * zero.res_axial, 0.0);
    zero.stick.assign(zero.inward.size(), 0.0);
    zero.footprint.assign(zero.inward.size(), 0);
    mech::ContactSpec rest;
    instance.reference_cache =
        std::make_shared<const TactileImage>(render(geom, instance, zero, rest));
  }
  return *instance.reference_cache;
}

TactileImage augment(const TactileImage& image, std::uint64_t seed, double noise_sigma,
                     double gain_lo, double gain_hi) {
  if (noise_sigma < 0.0) throw std::domain_error("noise sigma must be >= 0");
  TactileImage out = image;
  Rng rng(derive_seed(seed, 0xA06E57ULL));
  const double gain = rng.uniform(gain_lo, gain_hi);
  const double mcx = image.width / 2.0, mcy = image.height / 2.0;
  const double mr = std::min(image.width, image.height) / 2.0;
  const double mr2 = mr * mr;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const double dx = x + 0.5 - mcx, dy = y + 0.5 - mcy;
      if (dx * dx + dy * dy > mr2) continue;
      for (int c = 0; c < image.channels; ++c) {
        double v = image.at(x, y, c) * gain;
        if (noise_sigma > 0.0) v += rng.normal(0.0, noise_sigma);
        out.at(x, y, c) = static_cast<std::uint8_t>(
            std::clamp(std::lround(v), 0L, 255L));
      }
    }
  return out;
}

std::vector<std::array<double, 2>> marker_centroids(const TactileImage& image,
                                                    const SensorInstance& instance) {
  if (!instance.markers.enabled)
    throw std::logic_error("marker centroids requested for a markerless sensor");

  const int w = image.width, h = image.height;
  std::vector<double> luma(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int c = 0; c < image.channels; ++c) s += image.at(x, y, c);
      luma[static_cast<std::size_t>(y) * w + x] = s / image.channels;
    }

  // Integral image for box-window local means.
  std::vector<double> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += luma[static_cast<std::size_t>(y) * w + x];
      integral[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
          integral[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] + row;
    }
  }
  constexpr int kHalfWin = 20;
  auto local_mean = [&](int x, int y) {
    const int x0 = std::max(0, x - kHalfWin), x1 = std::min(w - 1, x + kHalfWin);
    const int y0 = std::max(0, y - kHalfWin), y1 = std::min(h - 1, y + kHalfWin);
    const double sum = integral[static_cast<std::size_t>(y1 + 1) * (w + 1) + (x1 + 1)] -
                       integral[static_cast<std::size_t>(y0) * (w + 1) + (x1 + 1)] -
                       integral[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
                       integral[static_cast<std::size_t>(y0) * (w + 1) + x0];
    return sum / ((x1 - x0 + 1) * (y1 - y0 + 1));
  };

  constexpr double kDarkRatio = 0.62;
  const double mcx = w / 2.0, mcy = h / 2.0;
  const double mr2 = std::pow(std::min(w, h) / 2.0, 2);
  std::vector<std::uint8_t> dark(luma.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x + 0.5 - mcx, dy = y + 0.5 - mcy;
      if (dx * dx + dy * dy > mr2) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (luma[idx] < kDarkRatio * local_mean(x, y)) dark[idx] = 1;
    }

  constexpr std::size_t kMinBlob = 5, kMaxBlob = 2500;
  std::vector<std::array<double, 2>> centroids;
  std::vector<std::size_t> stack;
  std::vector<std::size_t> blob;
  for (std::size_t start = 0; start < dark.size(); ++start) {
    if (!dark[start]) continue;
    blob.clear();
    stack.assign(1, start);
    dark[start] = 0;
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      blob.push_back(idx);
      const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
      for (int ny = y - 1; ny <= y + 1; ++ny)
        for (int nx = x - 1; nx <= x + 1; ++nx) {
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
          if (dark[nidx]) {
            dark[nidx] = 0;
            stack.push_back(nidx);
          }
        }
    }
    if (blob.size() < kMinBlob || blob.size() > kMaxBlob) continue;
    double wsum = 0.0, cx = 0.0, cy = 0.0;
    for (const std::size_t idx : blob) {
      const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
      const double wgt = std::max(0.0, local_mean(x, y) - luma[idx]);
      wsum += wgt;
      cx += wgt * (x + 0.5);
      cy += wgt * (y + 0.5);
    }
    if (wsum <= 0.0) continue;
    centroids.push_back({cx / wsum, cy / wsum});
  }
  return centroids;
}

}  // namespace tactsim::render
