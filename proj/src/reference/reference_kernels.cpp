#include <cmath>
#include <limits>

#include "cranaug/reference.hpp"
#include "cranaug/volume_ops.hpp"

namespace cranaug::reference {

Volume3 warp(const Volume3& v, const DisplacementField& u) {
  if (v.dims() != u.dims()) throw ShapeError("reference warp: dims mismatch");
  const Dims d = v.dims();
  Volume3 out(d, v.spacing(), 0.0);
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x) {
        const Vec3& w = u(x, y, z);
        out(x, y, z) = sample_trilinear(v, {x + w.x, y + w.y, z + w.z});
      }
  return out;
}

double mse(const Volume3& a, const Volume3& b) {
  if (a.dims() != b.dims()) throw ShapeError("reference mse: dims mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double diffusive_reg(const DisplacementField& u) {
  const Dims d = u.dims();
  double s = 0.0;
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x)
        for (int c = 0; c < 3; ++c) {
          double here = u(x, y, z)[c];
          double gx = x + 1 < d.x ? u(x + 1, y, z)[c] - here : 0.0;
          double gy = y + 1 < d.y ? u(x, y + 1, z)[c] - here : 0.0;
          double gz = z + 1 < d.z ? u(x, y, z + 1)[c] - here : 0.0;
          s += gx * gx + gy * gy + gz * gz;
        }
  return s / (3.0 * static_cast<double>(d.count()));
}

DisplacementField objective_gradient(const Volume3& moving, const Volume3& fixed, const DisplacementField& u,
                                     double alpha) {
  const Dims d = u.dims();
  if (moving.dims() != d || fixed.dims() != d) throw ShapeError("reference objective_gradient: dims mismatch");
  const double n = static_cast<double>(d.count());
  DisplacementField g(d);
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x) {
        const Vec3& w = u(x, y, z);
        Vec3 grad_m;
        double r = sample_trilinear_grad(moving, {x + w.x, y + w.y, z + w.z}, grad_m) - fixed(x, y, z);
        Vec3 out;
        for (int c = 0; c < 3; ++c) {
          // d/du of sum over forward differences touching this voxel
          double here = w[c];
          double reg = 0.0;
          if (x > 0) reg += here - u(x - 1, y, z)[c];
          if (x + 1 < d.x) reg -= u(x + 1, y, z)[c] - here;
          if (y > 0) reg += here - u(x, y - 1, z)[c];
          if (y + 1 < d.y) reg -= u(x, y + 1, z)[c] - here;
          if (z > 0) reg += here - u(x, y, z - 1)[c];
          if (z + 1 < d.z) reg -= u(x, y, z + 1)[c] - here;
          out[c] = 2.0 * r * grad_m[c] / n + alpha * 2.0 * reg / (3.0 * n);
        }
        g(x, y, z) = out;
      }
  return g;
}

Volume3 jacobian_determinant(const DisplacementField& u) {
  const Dims d = u.dims();
  Volume3 out(d, {1.0, 1.0, 1.0}, 0.0);
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x) {
        double j[3][3];
        std::int64_t pos[3] = {x, y, z};
        for (int a = 0; a < 3; ++a) {
          std::int64_t lo[3] = {x, y, z}, hi[3] = {x, y, z};
          double h;
          if (d[a] == 1) {
            lo[a] = hi[a] = 0;
            h = 1.0;
          } else if (pos[a] == 0) {
            hi[a] = 1;
            h = 1.0;
          } else if (pos[a] == d[a] - 1) {
            lo[a] = pos[a] - 1;
            h = 1.0;
          } else {
            lo[a] = pos[a] - 1;
            hi[a] = pos[a] + 1;
            h = 2.0;
          }
          for (int c = 0; c < 3; ++c) {
            j[c][a] = (u(hi[0], hi[1], hi[2])[c] - u(lo[0], lo[1], lo[2])[c]) / h + (a == c ? 1.0 : 0.0);
          }
        }
        out(x, y, z) = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
                       j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
                       j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
      }
  return out;
}

namespace {

// Serial 1-D squared distance transform of f (in place) with sample spacing w.
void dt_line(std::vector<double>& f, double w) {
  const auto n = static_cast<std::int64_t>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> v;
  std::vector<double> z;
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    while (!v.empty()) {
      std::int64_t p = v.back();
      double s = ((f[q] + w * w * q * q) - (f[p] + w * w * p * p)) / (2.0 * w * w * (q - p));
      if (s <= z.back()) {
        v.pop_back();
        z.pop_back();
      } else {
        break;
      }
    }
    if (v.empty()) {
      z.push_back(-inf);
    } else {
      std::int64_t p = v.back();
      z.push_back(((f[q] + w * w * q * q) - (f[p] + w * w * p * p)) / (2.0 * w * w * (q - p)));
    }
    v.push_back(q);
  }
  if (v.empty()) return;
  std::vector<double> out(f.size());
  std::size_t k = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (k + 1 < v.size() && z[k + 1] < q) ++k;
    double dd = w * static_cast<double>(q - v[k]);
    out[q] = dd * dd + f[v[k]];
  }
  f = out;
}

}  // namespace

Volume3 edt_squared(const BinaryMask& m, const Spacing& spacing) {
  const Dims d = m.dims();
  Volume3 out(d, spacing, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0.0 : std::numeric_limits<double>::infinity();
  std::vector<double> line;
  for (int axis = 0; axis < 3; ++axis) {
    const std::int64_t n = d[axis];
    line.resize(static_cast<std::size_t>(n));
    for (std::int64_t z = 0; z < (axis == 2 ? 1 : d.z); ++z)
      for (std::int64_t y = 0; y < (axis == 1 ? 1 : d.y); ++y)
        for (std::int64_t x = 0; x < (axis == 0 ? 1 : d.x); ++x) {
          for (std::int64_t i = 0; i < n; ++i) {
            line[i] = out(axis == 0 ? i : x, axis == 1 ? i : y, axis == 2 ? i : z);
          }
          dt_line(line, spacing[axis]);
          for (std::int64_t i = 0; i < n; ++i) {
            out(axis == 0 ? i : x, axis == 1 ? i : y, axis == 2 ? i : z) = line[i];
          }
        }
  }
  return out;
}

double min_pairwise_distance(const LatentBatch& batch) {
  if (batch.count() < 2) throw InsufficientDataError("reference min_pairwise_distance needs 2 vectors");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < batch.count(); ++i)
    for (std::size_t j = i + 1; j < batch.count(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < batch.dim(); ++k) {
        double dd = batch.row(i)[k] - batch.row(j)[k];
        s += dd * dd;
      }
      best = std::min(best, s);
    }
  return std::sqrt(best);
}

}  // namespace cranaug::reference
