#include "cranaug/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cranaug/parallel.hpp"
#include "cranaug/volume_ops.hpp"

namespace cranaug {

namespace {

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": dims " + to_string(a) + " vs " + to_string(b));
}

}  // namespace

double dsc(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a.dims(), b.dims(), "dsc");
  std::size_t na = a.count();
  std::size_t nb = b.count();
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(overlap_count(a, b)) / static_cast<double>(na + nb);
}

SoftDiceResult soft_dice_loss(const Volume3& p, const BinaryMask& g) {
  require_same_dims(p.dims(), g.dims(), "soft_dice_loss");
  double spg = 0.0, sp = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double v = p[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("soft_dice_loss: prediction value " + std::to_string(v) + " outside [0, 1] at voxel " +
                        std::to_string(i));
    }
    double gv = g[i] ? 1.0 : 0.0;
    spg += v * gv;
    sp += v;
    sg += gv;
  }
  const double num = 2.0 * spg + kSoftDiceEpsilon;
  const double den = sp + sg + kSoftDiceEpsilon;
  SoftDiceResult r;
  r.loss = 1.0 - num / den;
  r.gradient = Volume3(p.dims(), p.spacing(), 0.0);
  const double inv_den2 = 1.0 / (den * den);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double gv = g[i] ? 1.0 : 0.0;
    r.gradient[i] = -(2.0 * gv * den - num) * inv_den2;
  }
  return r;
}

namespace {

// Felzenszwalb-Huttenlocher lower envelope along one line. f holds squared
// distances (kNoForeground for none), w is the sample spacing. Results are
// written back into f. v, z are scratch of size n and n + 1.
void envelope_1d(double* f, std::int64_t n, std::int64_t stride, double w, std::vector<double>& vals,
                 std::vector<std::int64_t>& v, std::vector<double>& zb, std::vector<double>& out) {
  const double w2 = w * w;
  for (std::int64_t i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = f[i * stride];
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    double fq = vals[static_cast<std::size_t>(q)];
    if (fq == kNoForeground) continue;
    double dq = static_cast<double>(q);
    while (k >= 0) {
      std::int64_t p = v[static_cast<std::size_t>(k)];
      double dp = static_cast<double>(p);
      double s = ((fq + w2 * dq * dq) - (vals[static_cast<std::size_t>(p)] + w2 * dp * dp)) / (2.0 * w2 * (dq - dp));
      if (s <= zb[static_cast<std::size_t>(k)]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    if (k == 0) {
      zb[0] = -kNoForeground;
    } else {
      std::int64_t p = v[static_cast<std::size_t>(k - 1)];
      double dp = static_cast<double>(p);
      zb[static_cast<std::size_t>(k)] =
          ((fq + w2 * dq * dq) - (vals[static_cast<std::size_t>(p)] + w2 * dp * dp)) / (2.0 * w2 * (dq - dp));
    }
    zb[static_cast<std::size_t>(k + 1)] = kNoForeground;
  }
  if (k < 0) {
    for (std::int64_t i = 0; i < n; ++i) f[i * stride] = kNoForeground;
    return;
  }
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (zb[static_cast<std::size_t>(j + 1)] < static_cast<double>(q)) ++j;
    std::int64_t p = v[static_cast<std::size_t>(j)];
    double d = w * static_cast<double>(q - p);
    out[static_cast<std::size_t>(q)] = d * d + vals[static_cast<std::size_t>(p)];
  }
  for (std::int64_t i = 0; i < n; ++i) f[i * stride] = out[static_cast<std::size_t>(i)];
}

}  // namespace

Volume3 edt_squared(const BinaryMask& m, const Spacing& spacing) {
  validate_geometry(m.dims(), spacing);
  const Dims d = m.dims();
  Volume3 out(d, spacing, 0.0);
  {
    auto src = m.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 0.0 : kNoForeground;
  }
  double* base = out.data().data();
  const std::int64_t sx = 1, sy = d.x, sz = d.x * d.y;
  const std::int64_t longest = std::max({d.x, d.y, d.z});

  auto pass = [&](std::int64_t lines_outer, std::int64_t lines_inner, std::int64_t outer_stride,
                  std::int64_t inner_stride, std::int64_t n, std::int64_t stride, double w) {
#pragma omp parallel
    {
      std::vector<double> vals(static_cast<std::size_t>(longest));
      std::vector<std::int64_t> v(static_cast<std::size_t>(longest));
      std::vector<double> zb(static_cast<std::size_t>(longest + 1));
      std::vector<double> buf(static_cast<std::size_t>(longest));
#pragma omp for schedule(static)
      for (std::int64_t a = 0; a < lines_outer; ++a) {
        for (std::int64_t b = 0; b < lines_inner; ++b) {
          envelope_1d(base + a * outer_stride + b * inner_stride, n, stride, w, vals, v, zb, buf);
        }
      }
    }
  };
  pass(d.z, d.y, sz, sy, d.x, sx, spacing.x);  // along x
  pass(d.z, d.x, sz, sx, d.y, sy, spacing.y);  // along y
  pass(d.y, d.x, sy, sx, d.z, sz, spacing.z);  // along z
  return out;
}

Volume3 edt(const BinaryMask& m, const Spacing& spacing) {
  Volume3 out = edt_squared(m, spacing);
  for (double& v : out.data()) v = std::sqrt(v);
  return out;
}

BinaryMask surface_mask(const BinaryMask& m) {
  const Dims d = m.dims();
  BinaryMask out(d, m.spacing());
  MaskWriter w(out);
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        if (!m(x, y, z)) continue;
        bool edge = x == 0 || y == 0 || z == 0 || x == d.x - 1 || y == d.y - 1 || z == d.z - 1 ||
                    !m(x - 1, y, z) || !m(x + 1, y, z) || !m(x, y - 1, z) || !m(x, y + 1, z) ||
                    !m(x, y, z - 1) || !m(x, y, z + 1);
        if (edge) w.set(out.index(x, y, z), true);
      }
    }
  }
  return out;
}

SurfacePointSet surface_voxels(const BinaryMask& m, const Spacing& spacing) {
  BinaryMask s = surface_mask(m);
  const Dims d = m.dims();
  SurfacePointSet set;
  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        if (!s(x, y, z)) continue;
        set.indices.push_back(s.index(x, y, z));
        set.points.push_back({x * spacing.x, y * spacing.y, z * spacing.z});
      }
    }
  }
  return set;
}

std::vector<double> pooled_surface_distances(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing) {
  require_same_dims(a.dims(), b.dims(), "surface distances");
  BinaryMask sa = surface_mask(a);
  BinaryMask sb = surface_mask(b);
  if (sa.empty() || sb.empty()) throw EmptyInputError("surface distance is undefined for an empty mask");
  Volume3 to_b = edt_squared(sb, spacing);
  Volume3 to_a = edt_squared(sa, spacing);
  std::vector<double> out;
  out.reserve(sa.count() + sb.count());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i]) out.push_back(std::sqrt(to_b[i]));
  }
  for (std::size_t i = 0; i < sb.size(); ++i) {
    if (sb[i]) out.push_back(std::sqrt(to_a[i]));
  }
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyInputError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double fraction_within(const std::vector<double>& v, double tau) {
  std::size_t n = 0;
  for (double x : v) n += x <= tau;
  return static_cast<double>(n) / static_cast<double>(v.size());
}

}  // namespace

double hd95(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing) {
  return percentile(pooled_surface_distances(a, b, spacing), 95.0);
}

double msd(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing) {
  return mean_of(pooled_surface_distances(a, b, spacing));
}

double sdsc(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing, double tau) {
  if (!(tau >= 0.0)) throw DomainError("sdsc tolerance must be >= 0");
  return fraction_within(pooled_surface_distances(a, b, spacing), tau);
}

double bdsc(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing) {
  return sdsc(a, b, spacing, std::max({spacing.x, spacing.y, spacing.z}));
}

MetricsReport compute_metrics(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing, double tau) {
  MetricsReport r;
  r.dsc = dsc(a, b);
  const bool ea = a.empty();
  const bool eb = b.empty();
  if (ea && eb) return {1.0, 1.0, 0.0, 0.0, 1.0};
  if (ea || eb) return {r.dsc, 0.0, kUndefinedDistance, kUndefinedDistance, 0.0};
  std::vector<double> d = pooled_surface_distances(a, b, spacing);
  r.sdsc = fraction_within(d, tau);
  r.bdsc = fraction_within(d, std::max({spacing.x, spacing.y, spacing.z}));
  r.msd = mean_of(d);
  r.hd95 = percentile(std::move(d), 95.0);
  return r;
}

MetricsReport evaluate_case(const BinaryMask& pred, const BinaryMask& gt, const Dims& native_dims,
                            const Spacing& spacing, double tau, std::optional<Translation> centering) {
  if (gt.dims() != native_dims) {
    throw ShapeError("evaluate_case: ground truth dims " + to_string(gt.dims()) + " differ from native dims " +
                     to_string(native_dims));
  }
  BinaryMask native = resample(pred, native_dims);
  if (centering) native = translate(native, centering->inverse());
  return compute_metrics(native, gt, spacing, tau);
}

}  // namespace cranaug
