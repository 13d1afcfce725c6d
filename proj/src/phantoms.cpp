#include "cranaug/phantoms.hpp"

#include <cmath>

#include "cranaug/rng.hpp"

namespace cranaug::phantoms {

namespace {

// Normalized ellipsoid radius of voxel (x, y, z): 1 on the surface.
inline double ellipsoid_r(double x, double y, double z, const Vec3& c, const Vec3& r) {
  double dx = (x - c.x) / r.x, dy = (y - c.y) / r.y, dz = (z - c.z) / r.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

BinaryMask ellipsoid_shell(const Dims& dims, const Vec3& center, const Vec3& outer, double thickness) {
  Vec3 inner{outer.x - thickness, outer.y - thickness, outer.z - thickness};
  BinaryMask m(dims);
  for (std::int64_t z = 0; z < dims.z; ++z) {
    for (std::int64_t y = 0; y < dims.y; ++y) {
      for (std::int64_t x = 0; x < dims.x; ++x) {
        bool in_outer = ellipsoid_r(x, y, z, center, outer) <= 1.0;
        bool in_inner = inner.x > 0 && inner.y > 0 && inner.z > 0 && ellipsoid_r(x, y, z, center, inner) < 1.0;
        m.set(x, y, z, in_outer && !in_inner);
      }
    }
  }
  return m;
}

BinaryMask sphere_shell(const Dims& dims, const Vec3& center, double outer_radius, double thickness) {
  return ellipsoid_shell(dims, center, {outer_radius, outer_radius, outer_radius}, thickness);
}

BinaryMask solid_ellipsoid(const Dims& dims, const Vec3& center, const Vec3& radii) {
  BinaryMask m(dims);
  for (std::int64_t z = 0; z < dims.z; ++z) {
    for (std::int64_t y = 0; y < dims.y; ++y) {
      for (std::int64_t x = 0; x < dims.x; ++x) m.set(x, y, z, ellipsoid_r(x, y, z, center, radii) <= 1.0);
    }
  }
  return m;
}

BinaryMask box(const Dims& dims, const Dims& lo, const Dims& hi) {
  BinaryMask m(dims);
  for (std::int64_t z = lo.z; z <= hi.z; ++z) {
    for (std::int64_t y = lo.y; y <= hi.y; ++y) {
      for (std::int64_t x = lo.x; x <= hi.x; ++x) {
        if (m.contains(x, y, z)) m.set(x, y, z, true);
      }
    }
  }
  return m;
}

ShellPair shell_fixture(std::int64_t n) {
  Dims d{n, n, n};
  double s = static_cast<double>(n) / 64.0;
  Vec3 c{(n - 1) / 2.0, (n - 1) / 2.0, (n - 1) / 2.0};
  return {sphere_shell(d, c, 20.0 * s, 5.0 * s), ellipsoid_shell(d, c, {24.0 * s, 17.0 * s, 20.0 * s}, 5.0 * s)};
}

CasePair skull_case(const Dims& dims, std::uint64_t seed) {
  Rng rng(seed);
  Vec3 c{(dims.x - 1) / 2.0 + rng.uniform(-1.0, 1.0), (dims.y - 1) / 2.0 + rng.uniform(-1.0, 1.0),
         (dims.z - 1) / 2.0 + rng.uniform(-1.0, 1.0)};
  Vec3 outer{dims.x * rng.uniform(0.30, 0.36), dims.y * rng.uniform(0.34, 0.40), dims.z * rng.uniform(0.28, 0.34)};
  double wall = std::max(2.0, dims.x * 0.05);
  BinaryMask complete = ellipsoid_shell(dims, c, outer, wall);

  // Defect: the part of the shell inside a sphere centered on the upper shell.
  double theta = rng.uniform(0.2, 1.2);
  double phi = rng.uniform(0.0, 6.283185307179586);
  Vec3 hole{c.x + outer.x * std::sin(theta) * std::cos(phi), c.y + outer.y * std::sin(theta) * std::sin(phi),
            c.z + outer.z * std::cos(theta)};
  double radius = dims.x * rng.uniform(0.10, 0.16);
  CasePair pair{BinaryMask(dims), BinaryMask(dims)};
  for (std::int64_t z = 0; z < dims.z; ++z) {
    for (std::int64_t y = 0; y < dims.y; ++y) {
      for (std::int64_t x = 0; x < dims.x; ++x) {
        if (!complete(x, y, z)) continue;
        double dx = x - hole.x, dy = y - hole.y, dz = z - hole.z;
        bool in_hole = dx * dx + dy * dy + dz * dz <= radius * radius;
        (in_hole ? pair.defect : pair.defective_skull).set(x, y, z, true);
      }
    }
  }
  return pair;
}

BinaryMask smooth_blob(const Dims& dims, std::uint64_t seed, double margin) {
  Rng rng(seed);
  BinaryMask m(dims);
  int parts = 2 + static_cast<int>(rng.below(3));
  for (int k = 0; k < parts; ++k) {
    Vec3 r;
    Vec3 c;
    for (int a = 0; a < 3; ++a) {
      double n = static_cast<double>(dims[a]);
      double room = n / 2.0 - margin;
      r[a] = std::max(1.5, room * rng.uniform(0.3, 0.6));
      c[a] = n / 2.0 - 0.5 + rng.uniform(-1.0, 1.0) * std::max(0.0, room - r[a]);
    }
    BinaryMask e = solid_ellipsoid(dims, c, r);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (e[i]) m.set(i, true);
    }
  }
  return m;
}

}  // namespace cranaug::phantoms
