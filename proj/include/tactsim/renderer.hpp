#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tactsim/geometry.hpp"
#include "tactsim/image.hpp"
#include "tactsim/mechanics.hpp"
#include "tactsim/sensor.hpp"

namespace tactsim::render {

using TactileImage = img::Image8;

// Ray-casts the deformed membrane through the fisheye model under the LED
// ring. Pure function of its inputs; bit-reproducible. Throws
// std::invalid_argument if the field grid is coarser than 256x128.
TactileImage render(const geometry::ShellGeometry& geom, const SensorInstance& instance,
                    const mech::DisplacementField& field, const mech::ContactSpec& spec);

// Zero-deformation render, cached on the instance.
const TactileImage& reference_image(const geometry::ShellGeometry& geom,
                                    const SensorInstance& instance);

// Additive Gaussian pixel noise plus a global gain draw, inside the mask
// only. sigma is in 8-bit counts. Throws std::domain_error for sigma < 0.
TactileImage augment(const TactileImage& image, std::uint64_t seed,
                     double noise_sigma = 2.0, double gain_lo = 0.9,
                     double gain_hi = 1.1);

// Dark-dot detection with sub-pixel intensity-weighted centroids. Throws
// std::logic_error when the instance has markers disabled.
std::vector<std::array<double, 2>> marker_centroids(const TactileImage& image,
                                                    const SensorInstance& instance);

// Displaced 3D marker centers for a contact (inward motion plus tangential
// stick transport). Used by rendering and by flow oracles.
std::vector<Vec3> displaced_marker_points(const geometry::ShellGeometry& geom,
                                          const SensorInstance& instance,
                                          const mech::DisplacementField& field,
                                          const mech::ContactSpec& spec);

}  // namespace tactsim::render
