#include "cranaug/affine.hpp"

#include <cmath>
#include <numbers>

namespace cranaug {

Vec3 Matrix4::apply(const Vec3& p) const {
  const Matrix4& a = *this;
  return {a(0, 0) * p.x + a(0, 1) * p.y + a(0, 2) * p.z + a(0, 3),
          a(1, 0) * p.x + a(1, 1) * p.y + a(1, 2) * p.z + a(1, 3),
          a(2, 0) * p.x + a(2, 1) * p.y + a(2, 2) * p.z + a(2, 3)};
}

Matrix4 operator*(const Matrix4& a, const Matrix4& b) {
  Matrix4 r;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  }
  return r;
}

Matrix4 Matrix4::inverse() const {
  const Matrix4& a = *this;
  // 3x3 linear part by cofactors, translation by -A^-1 t.
  double c00 = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  double c01 = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  double c02 = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  double det = a(0, 0) * c00 + a(0, 1) * c01 + a(0, 2) * c02;
  if (det == 0.0 || !std::isfinite(det)) throw DomainError("affine matrix is singular");
  double inv = 1.0 / det;
  Matrix4 r;
  r(0, 0) = c00 * inv;
  r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) * inv;
  r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * inv;
  r(1, 0) = c01 * inv;
  r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) * inv;
  r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) * inv;
  r(2, 0) = c02 * inv;
  r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) * inv;
  r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) * inv;
  for (int i = 0; i < 3; ++i) {
    r(i, 3) = -(r(i, 0) * a(0, 3) + r(i, 1) * a(1, 3) + r(i, 2) * a(2, 3));
  }
  r(3, 0) = r(3, 1) = r(3, 2) = 0.0;
  r(3, 3) = 1.0;
  return r;
}

bool AffineTransform::is_identity() const {
  return rotation_deg == Vec3{} && translation == Vec3{} && scale == Vec3{1.0, 1.0, 1.0};
}

Vec3 AffineTransform::pivot(const Dims& dims) const {
  if (has_center) return center;
  return {(dims.x - 1) / 2.0, (dims.y - 1) / 2.0, (dims.z - 1) / 2.0};
}

namespace {

Matrix4 rotation(int axis, double deg) {
  Matrix4 r;
  if (deg == 0.0) return r;
  double rad = deg * std::numbers::pi / 180.0;
  double c = std::cos(rad);
  double s = std::sin(rad);
  int i = (axis + 1) % 3;
  int j = (axis + 2) % 3;
  r(i, i) = c;
  r(i, j) = -s;
  r(j, i) = s;
  r(j, j) = c;
  return r;
}

Matrix4 translation_matrix(const Vec3& t) {
  Matrix4 m;
  m(0, 3) = t.x;
  m(1, 3) = t.y;
  m(2, 3) = t.z;
  return m;
}

}  // namespace

Matrix4 AffineTransform::matrix(const Dims& dims) const {
  if (scale.x <= 0.0 || scale.y <= 0.0 || scale.z <= 0.0) {
    throw DomainError("affine scale components must be > 0");
  }
  Vec3 c = pivot(dims);
  Matrix4 s;
  s(0, 0) = scale.x;
  s(1, 1) = scale.y;
  s(2, 2) = scale.z;
  Matrix4 rot = rotation(2, rotation_deg.z) * rotation(1, rotation_deg.y) * rotation(0, rotation_deg.x);
  return translation_matrix(c + translation) * rot * s * translation_matrix(Vec3{} - c);
}

}  // namespace cranaug
