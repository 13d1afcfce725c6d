#include "cranaug/volume_ops.hpp"

#include <algorithm>
#include <cmath>

namespace cranaug {

namespace {

inline double read_or_zero(const Volume3& v, std::int64_t x, std::int64_t y, std::int64_t z) {
  return v.contains(x, y, z) ? v(x, y, z) : 0.0;
}

inline std::int64_t clamp_index(std::int64_t i, std::int64_t n) { return std::clamp<std::int64_t>(i, 0, n - 1); }

}  // namespace

double sample_trilinear(const Volume3& v, const Vec3& p) {
  const Dims& d = v.dims();
  double fx = std::floor(p.x);
  double fy = std::floor(p.y);
  double fz = std::floor(p.z);
  if (fx < -1.0 || fy < -1.0 || fz < -1.0 || fx > double(d.x - 1) || fy > double(d.y - 1) ||
      fz > double(d.z - 1) || !std::isfinite(fx + fy + fz)) {
    return 0.0;
  }
  auto x0 = static_cast<std::int64_t>(fx);
  auto y0 = static_cast<std::int64_t>(fy);
  auto z0 = static_cast<std::int64_t>(fz);
  double tx = p.x - fx;
  double ty = p.y - fy;
  double tz = p.z - fz;

  // Interior fast path.
  if (x0 >= 0 && y0 >= 0 && z0 >= 0 && x0 + 1 < d.x && y0 + 1 < d.y && z0 + 1 < d.z) {
    std::size_t i = v.index(x0, y0, z0);
    std::size_t sy = static_cast<std::size_t>(d.x);
    std::size_t sz = static_cast<std::size_t>(d.x * d.y);
    double c00 = v[i] + tx * (v[i + 1] - v[i]);
    double c10 = v[i + sy] + tx * (v[i + sy + 1] - v[i + sy]);
    double c01 = v[i + sz] + tx * (v[i + sz + 1] - v[i + sz]);
    double c11 = v[i + sy + sz] + tx * (v[i + sy + sz + 1] - v[i + sy + sz]);
    double c0 = c00 + ty * (c10 - c00);
    double c1 = c01 + ty * (c11 - c01);
    return c0 + tz * (c1 - c0);
  }
  double v000 = read_or_zero(v, x0, y0, z0);
  double v100 = read_or_zero(v, x0 + 1, y0, z0);
  double v010 = read_or_zero(v, x0, y0 + 1, z0);
  double v110 = read_or_zero(v, x0 + 1, y0 + 1, z0);
  double v001 = read_or_zero(v, x0, y0, z0 + 1);
  double v101 = read_or_zero(v, x0 + 1, y0, z0 + 1);
  double v011 = read_or_zero(v, x0, y0 + 1, z0 + 1);
  double v111 = read_or_zero(v, x0 + 1, y0 + 1, z0 + 1);
  double c00 = v000 + tx * (v100 - v000);
  double c10 = v010 + tx * (v110 - v010);
  double c01 = v001 + tx * (v101 - v001);
  double c11 = v011 + tx * (v111 - v011);
  double c0 = c00 + ty * (c10 - c00);
  double c1 = c01 + ty * (c11 - c01);
  return c0 + tz * (c1 - c0);
}

double sample_trilinear_grad(const Volume3& v, const Vec3& p, Vec3& grad) {
  const Dims& d = v.dims();
  double fx = std::floor(p.x);
  double fy = std::floor(p.y);
  double fz = std::floor(p.z);
  grad = {};
  if (fx < -1.0 || fy < -1.0 || fz < -1.0 || fx > double(d.x - 1) || fy > double(d.y - 1) ||
      fz > double(d.z - 1) || !std::isfinite(fx + fy + fz)) {
    return 0.0;
  }
  auto x0 = static_cast<std::int64_t>(fx);
  auto y0 = static_cast<std::int64_t>(fy);
  auto z0 = static_cast<std::int64_t>(fz);
  double tx = p.x - fx;
  double ty = p.y - fy;
  double tz = p.z - fz;
  double v000 = read_or_zero(v, x0, y0, z0);
  double v100 = read_or_zero(v, x0 + 1, y0, z0);
  double v010 = read_or_zero(v, x0, y0 + 1, z0);
  double v110 = read_or_zero(v, x0 + 1, y0 + 1, z0);
  double v001 = read_or_zero(v, x0, y0, z0 + 1);
  double v101 = read_or_zero(v, x0 + 1, y0, z0 + 1);
  double v011 = read_or_zero(v, x0, y0 + 1, z0 + 1);
  double v111 = read_or_zero(v, x0 + 1, y0 + 1, z0 + 1);

  double c00 = v000 + tx * (v100 - v000);
  double c10 = v010 + tx * (v110 - v010);
  double c01 = v001 + tx * (v101 - v001);
  double c11 = v011 + tx * (v111 - v011);
  double c0 = c00 + ty * (c10 - c00);
  double c1 = c01 + ty * (c11 - c01);

  // d/dx: interpolate the x-differences in y and z.
  double dx00 = v100 - v000;
  double dx10 = v110 - v010;
  double dx01 = v101 - v001;
  double dx11 = v111 - v011;
  double dx0 = dx00 + ty * (dx10 - dx00);
  double dx1 = dx01 + ty * (dx11 - dx01);
  grad.x = dx0 + tz * (dx1 - dx0);
  grad.y = (c10 - c00) + tz * ((c11 - c01) - (c10 - c00));
  grad.z = c1 - c0;
  return c0 + tz * (c1 - c0);
}

namespace {

// Source coordinate of destination index i when mapping n_dst -> n_src.
inline double source_coord(std::int64_t i, std::int64_t n_src, std::int64_t n_dst) {
  if (n_src == n_dst) return static_cast<double>(i);
  return (static_cast<double>(i) + 0.5) * static_cast<double>(n_src) / static_cast<double>(n_dst) - 0.5;
}

inline std::int64_t nearest_index(std::int64_t i, std::int64_t n_src, std::int64_t n_dst) {
  double c = source_coord(i, n_src, n_dst);
  return clamp_index(static_cast<std::int64_t>(std::floor(c + 0.5)), n_src);
}

Spacing rescaled_spacing(const Spacing& s, const Dims& src, const Dims& dst) {
  Spacing out;
  for (int a = 0; a < 3; ++a) out[a] = s[a] * static_cast<double>(src[a]) / static_cast<double>(dst[a]);
  return out;
}

// Edge-clamped trilinear read for resampling.
double sample_clamped(const Volume3& v, double x, double y, double z) {
  const Dims& d = v.dims();
  auto axis = [](double c, std::int64_t n, std::int64_t& i0, std::int64_t& i1, double& t) {
    if (c <= 0.0) {
      i0 = i1 = 0;
      t = 0.0;
    } else if (c >= static_cast<double>(n - 1)) {
      i0 = i1 = n - 1;
      t = 0.0;
    } else {
      double f = std::floor(c);
      i0 = static_cast<std::int64_t>(f);
      i1 = i0 + 1;
      t = c - f;
    }
  };
  std::int64_t x0, x1, y0, y1, z0, z1;
  double tx, ty, tz;
  axis(x, d.x, x0, x1, tx);
  axis(y, d.y, y0, y1, ty);
  axis(z, d.z, z0, z1, tz);
  double c00 = v(x0, y0, z0) + tx * (v(x1, y0, z0) - v(x0, y0, z0));
  double c10 = v(x0, y1, z0) + tx * (v(x1, y1, z0) - v(x0, y1, z0));
  double c01 = v(x0, y0, z1) + tx * (v(x1, y0, z1) - v(x0, y0, z1));
  double c11 = v(x0, y1, z1) + tx * (v(x1, y1, z1) - v(x0, y1, z1));
  double c0 = c00 + ty * (c10 - c00);
  double c1 = c01 + ty * (c11 - c01);
  return c0 + tz * (c1 - c0);
}

}  // namespace

Volume3 resample(const Volume3& v, const Dims& target, Interpolation mode) {
  validate_geometry(target, v.spacing());
  if (target == v.dims()) return v;
  const Dims src = v.dims();
  Volume3 out(target, rescaled_spacing(v.spacing(), src, target), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < target.z; ++z) {
    for (std::int64_t y = 0; y < target.y; ++y) {
      for (std::int64_t x = 0; x < target.x; ++x) {
        double value;
        if (mode == Interpolation::nearest) {
          value = v(nearest_index(x, src.x, target.x), nearest_index(y, src.y, target.y),
                    nearest_index(z, src.z, target.z));
        } else {
          value = sample_clamped(v, source_coord(x, src.x, target.x), source_coord(y, src.y, target.y),
                                 source_coord(z, src.z, target.z));
        }
        out(x, y, z) = value;
      }
    }
  }
  return out;
}

BinaryMask resample(const BinaryMask& m, const Dims& target) {
  validate_geometry(target, m.spacing());
  if (target == m.dims()) return m;
  const Dims src = m.dims();
  BinaryMask out(target, rescaled_spacing(m.spacing(), src, target));
  MaskWriter w(out);
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < target.z; ++z) {
    std::int64_t sz = nearest_index(z, src.z, target.z);
    for (std::int64_t y = 0; y < target.y; ++y) {
      std::int64_t sy = nearest_index(y, src.y, target.y);
      for (std::int64_t x = 0; x < target.x; ++x) {
        w.set(out.index(x, y, z), m(nearest_index(x, src.x, target.x), sy, sz));
      }
    }
  }
  return out;
}

BinaryMask binarize(const Volume3& v, double threshold) {
  BinaryMask out(v.dims(), v.spacing());
  MaskWriter w(out);
  auto data = v.data();
  const auto n = static_cast<std::int64_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) w.set(static_cast<std::size_t>(i), data[static_cast<std::size_t>(i)] > threshold);
  return out;
}

BinaryMask apply_affine(const BinaryMask& m, const AffineTransform& t) {
  if (t.is_identity()) return m;
  return apply_affine(m, t.matrix(m.dims()));
}

BinaryMask apply_affine(const BinaryMask& m, const Matrix4& forward) {
  const Matrix4 back = forward.inverse();
  const Volume3 src = m.to_volume();
  const Dims d = m.dims();
  BinaryMask out(d, m.spacing());
  MaskWriter w(out);
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        Vec3 p = back.apply({double(x), double(y), double(z)});
        w.set(out.index(x, y, z), sample_trilinear(src, p) > 0.5);
      }
    }
  }
  return out;
}

BinaryMask translate(const BinaryMask& m, const Translation& t) {
  const Dims d = m.dims();
  BinaryMask out(d, m.spacing());
  MaskWriter w(out);
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < d.z; ++z) {
    std::int64_t sz = z - t.z;
    if (sz < 0 || sz >= d.z) continue;
    for (std::int64_t y = 0; y < d.y; ++y) {
      std::int64_t sy = y - t.y;
      if (sy < 0 || sy >= d.y) continue;
      for (std::int64_t x = 0; x < d.x; ++x) {
        std::int64_t sx = x - t.x;
        if (sx < 0 || sx >= d.x) continue;
        w.set(out.index(x, y, z), m(sx, sy, sz));
      }
    }
  }
  return out;
}

BinaryMask flip(const BinaryMask& m, int axis) {
  if (axis < 0 || axis > 2) throw DomainError("flip axis must be 0, 1 or 2");
  const Dims d = m.dims();
  BinaryMask out(d, m.spacing());
  MaskWriter w(out);
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        std::int64_t sx = axis == 0 ? d.x - 1 - x : x;
        std::int64_t sy = axis == 1 ? d.y - 1 - y : y;
        std::int64_t sz = axis == 2 ? d.z - 1 - z : z;
        w.set(out.index(x, y, z), m(sx, sy, sz));
      }
    }
  }
  return out;
}

BoundingBox bounding_box(const BinaryMask& m) {
  const Dims d = m.dims();
  BoundingBox b{{d.x, d.y, d.z}, {-1, -1, -1}};
  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        if (!m(x, y, z)) continue;
        b.lo = {std::min(b.lo.x, x), std::min(b.lo.y, y), std::min(b.lo.z, z)};
        b.hi = {std::max(b.hi.x, x), std::max(b.hi.y, y), std::max(b.hi.z, z)};
      }
    }
  }
  if (b.hi.x < 0) throw EmptyInputError("bounding box of an empty mask");
  return b;
}

std::pair<BinaryMask, Translation> center_with_offset(const BinaryMask& m, std::int64_t offset) {
  if (offset < 0) throw ValidationError("centering offset must be >= 0");
  if (m.empty()) throw EmptyInputError("cannot center an empty mask");
  const BoundingBox box = bounding_box(m);
  const Dims d = m.dims();
  static constexpr const char* kAxis[] = {"x", "y", "z"};
  std::int64_t shift[3];
  for (int a = 0; a < 3; ++a) {
    std::int64_t extent = box.hi[a] - box.lo[a] + 1;
    if (extent + 2 * offset > d[a]) {
      throw CapacityError(std::string("bounding box extent ") + std::to_string(extent) + " plus 2 x offset " +
                          std::to_string(offset) + " exceeds grid size " + std::to_string(d[a]) +
                          " on axis " + kAxis[a]);
    }
    shift[a] = (d[a] - extent) / 2 - box.lo[a];
  }
  Translation t{shift[0], shift[1], shift[2]};
  return {translate(m, t), t};
}

}  // namespace cranaug
