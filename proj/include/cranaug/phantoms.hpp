#pragma once

// Synthetic binary shapes for tests, benchmarks and demos.

#include <cstdint>

#include "cranaug/geo_aug.hpp"
#include "cranaug/volume.hpp"

namespace cranaug::phantoms {

// Voxels whose center lies within the ellipsoidal shell of outer semi-axes
// `outer` and wall `thickness` (voxels) around `center`.
BinaryMask ellipsoid_shell(const Dims& dims, const Vec3& center, const Vec3& outer, double thickness);
BinaryMask sphere_shell(const Dims& dims, const Vec3& center, double outer_radius, double thickness);
BinaryMask solid_ellipsoid(const Dims& dims, const Vec3& center, const Vec3& radii);
BinaryMask box(const Dims& dims, const Dims& lo, const Dims& hi);  // inclusive

// Registration fixture at 64^3: sphere shell (r 20, wall 5) moving toward an
// ellipsoid shell (24 x 17 x 20, wall 5), both centered.
struct ShellPair {
  BinaryMask sphere;
  BinaryMask ellipsoid;
};
ShellPair shell_fixture(std::int64_t n = 64);

// Skull-like case: ellipsoidal shell with a spherical cap cut out as the
// defect. Jittered by seed so different seeds give different anatomy.
CasePair skull_case(const Dims& dims, std::uint64_t seed);

// Union of a few random solid ellipsoids kept away from the border.
BinaryMask smooth_blob(const Dims& dims, std::uint64_t seed, double margin);

}  // namespace cranaug::phantoms
