#pragma once

#include <array>

#include "cranaug/volume.hpp"

namespace cranaug {

// Row-major 4x4 homogeneous matrix acting on (x, y, z, 1) column vectors.
struct Matrix4 {
  std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

  static Matrix4 identity() { return {}; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 4 + c)]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 4 + c)]; }

  Vec3 apply(const Vec3& p) const;
  Matrix4 inverse() const;  // affine inverse; throws DomainError if singular
  friend Matrix4 operator*(const Matrix4& a, const Matrix4& b);
  bool operator==(const Matrix4&) const = default;
};

// Rotation (degrees about x, y, z), translation (voxels) and scale about a
// pivot in voxel coordinates. Forward map:
//   p' = Rz * Ry * Rx * S * (p - center) + center + translation
// When has_center is false the pivot is the grid center ((n - 1) / 2).
struct AffineTransform {
  Vec3 rotation_deg{};
  Vec3 translation{};
  Vec3 scale{1.0, 1.0, 1.0};
  Vec3 center{};
  bool has_center = false;

  bool is_identity() const;
  Vec3 pivot(const Dims& dims) const;
  Matrix4 matrix(const Dims& dims) const;
};

}  // namespace cranaug
