#include "cranaug/registration.hpp"

#include <cmath>
#include <sstream>

#include "cranaug/parallel.hpp"
#include "cranaug/volume_ops.hpp"

namespace cranaug {

DisplacementField::DisplacementField(Dims dims, int level) : dims_(dims), level_(level) {
  validate_geometry(dims_, {1.0, 1.0, 1.0});
  data_.assign(dims_.count(), Vec3{});
}

DisplacementField::DisplacementField(Dims dims, std::vector<Vec3> data, int level)
    : dims_(dims), level_(level), data_(std::move(data)) {
  validate_geometry(dims_, {1.0, 1.0, 1.0});
  if (data_.size() != dims_.count()) throw ShapeError("displacement field length does not match dims");
}

bool DisplacementField::all_finite() const {
  for (const Vec3& v : data_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) return false;
  }
  return true;
}

double DisplacementField::mean_magnitude() const {
  double s = 0.0;
  for (const Vec3& v : data_) s += std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return s / static_cast<double>(data_.size());
}

void RegConfig::validate() const {
  if (levels < 1) throw ValidationError("reg.levels must be >= 1");
  if (iterations_per_level < 1) throw ValidationError("reg.iterations_per_level must be >= 1");
  if (!(step_size > 0.0)) throw ValidationError("reg.step_size must be > 0");
  if (!(alpha >= 0.0)) throw ValidationError("reg.alpha must be >= 0");
  if (!(reference_size > 0.0)) throw ValidationError("reg.reference_size must be > 0");
}

double RegConfig::alpha_voxel() const {
  double k = 2.0 / reference_size;
  return alpha * k * k;
}

namespace {

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": dims " + to_string(a) + " vs " + to_string(b));
}

// Sum over the voxels of slice z of the squared forward differences of u.
double reg_slice(const DisplacementField& u, std::int64_t z) {
  const Dims d = u.dims();
  double s = 0.0;
  for (std::int64_t y = 0; y < d.y; ++y) {
    for (std::int64_t x = 0; x < d.x; ++x) {
      const Vec3& c = u(x, y, z);
      if (x + 1 < d.x) {
        Vec3 df = u(x + 1, y, z) - c;
        s += df.x * df.x + df.y * df.y + df.z * df.z;
      }
      if (y + 1 < d.y) {
        Vec3 df = u(x, y + 1, z) - c;
        s += df.x * df.x + df.y * df.y + df.z * df.z;
      }
      if (z + 1 < d.z) {
        Vec3 df = u(x, y, z + 1) - c;
        s += df.x * df.x + df.y * df.y + df.z * df.z;
      }
    }
  }
  return s;
}

// Neumann Laplacian sum_d [u(x+e) - u(x)] + [u(x-e) - u(x)], missing
// neighbors contributing nothing.
inline Vec3 laplacian(const DisplacementField& u, std::int64_t x, std::int64_t y, std::int64_t z) {
  const Dims d = u.dims();
  const Vec3& c = u(x, y, z);
  Vec3 l{};
  if (x > 0) l = l + (u(x - 1, y, z) - c);
  if (x + 1 < d.x) l = l + (u(x + 1, y, z) - c);
  if (y > 0) l = l + (u(x, y - 1, z) - c);
  if (y + 1 < d.y) l = l + (u(x, y + 1, z) - c);
  if (z > 0) l = l + (u(x, y, z - 1) - c);
  if (z + 1 < d.z) l = l + (u(x, y, z + 1) - c);
  return l;
}

struct Evaluation {
  double mse = 0.0;
  double reg = 0.0;  // diffusive_reg, voxel units
};

// Objective terms and, when grad is non-null, the per-voxel gradient
//   N * d objective / d u(x) = 2 (W - F) grad M(x + u) - (2 alpha / 3) lap u
Evaluation evaluate(const Volume3& moving, const Volume3& fixed, const DisplacementField& u, double alpha,
                    DisplacementField* grad) {
  const Dims d = u.dims();
  const double n = static_cast<double>(d.count());
  const double reg_weight = 2.0 * alpha / 3.0;
  Evaluation e;
  e.mse = parallel::ordered_sum(d.z, [&](std::int64_t z) {
    double s = 0.0;
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        std::size_t i = fixed.index(x, y, z);
        const Vec3& ui = u[i];
        Vec3 p{double(x) + ui.x, double(y) + ui.y, double(z) + ui.z};
        double r;
        if (grad) {
          Vec3 g;
          r = sample_trilinear_grad(moving, p, g) - fixed[i];
          Vec3 lap = laplacian(u, x, y, z);
          (*grad)[i] = (2.0 * r) * g - reg_weight * lap;
        } else {
          r = sample_trilinear(moving, p) - fixed[i];
        }
        s += r * r;
      }
    }
    return s;
  }) / n;
  e.reg = parallel::ordered_sum(d.z, [&](std::int64_t z) { return reg_slice(u, z); }) / (3.0 * n);
  return e;
}

}  // namespace

Volume3 warp(const Volume3& v, const DisplacementField& u) {
  require_same_dims(v.dims(), u.dims(), "warp");
  const Dims d = v.dims();
  Volume3 out(d, v.spacing(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        std::size_t i = out.index(x, y, z);
        const Vec3& ui = u[i];
        out[i] = sample_trilinear(v, {double(x) + ui.x, double(y) + ui.y, double(z) + ui.z});
      }
    }
  }
  return out;
}

BinaryMask warp_mask(const BinaryMask& m, const DisplacementField& u) { return binarize(warp(m.to_volume(), u), 0.5); }

double mse(const Volume3& a, const Volume3& b) {
  require_same_dims(a.dims(), b.dims(), "mse");
  const Dims d = a.dims();
  const std::size_t slice = static_cast<std::size_t>(d.x * d.y);
  double s = parallel::ordered_sum(d.z, [&](std::int64_t z) {
    double acc = 0.0;
    std::size_t begin = static_cast<std::size_t>(z) * slice;
    for (std::size_t i = begin; i < begin + slice; ++i) {
      double r = a[i] - b[i];
      acc += r * r;
    }
    return acc;
  });
  return s / static_cast<double>(a.size());
}

double diffusive_reg(const DisplacementField& u) {
  const Dims d = u.dims();
  double s = parallel::ordered_sum(d.z, [&](std::int64_t z) { return reg_slice(u, z); });
  return s / (3.0 * static_cast<double>(d.count()));
}

ObjectiveTerms objective(const Volume3& moving, const Volume3& fixed, const DisplacementField& u, double alpha) {
  require_same_dims(moving.dims(), fixed.dims(), "objective (moving vs fixed)");
  require_same_dims(fixed.dims(), u.dims(), "objective (fixed vs field)");
  ObjectiveTerms t;
  t.mse = mse(warp(moving, u), fixed);
  t.reg = diffusive_reg(u);
  t.total = t.mse + alpha * t.reg;
  return t;
}

DisplacementField objective_gradient(const Volume3& moving, const Volume3& fixed, const DisplacementField& u,
                                     double alpha) {
  require_same_dims(moving.dims(), fixed.dims(), "objective_gradient (moving vs fixed)");
  require_same_dims(fixed.dims(), u.dims(), "objective_gradient (fixed vs field)");
  DisplacementField g(u.dims(), u.level());
  evaluate(moving, fixed, u, alpha, &g);
  const double inv_n = 1.0 / static_cast<double>(u.size());
  for (Vec3& v : g.data()) v = inv_n * v;
  return g;
}

Volume3 jacobian_determinant(const DisplacementField& u) {
  const Dims d = u.dims();
  Volume3 out(d, {1.0, 1.0, 1.0}, 0.0);
  // Derivative of u along axis a at (x, y, z).
  auto deriv = [&](std::int64_t x, std::int64_t y, std::int64_t z, int a) -> Vec3 {
    std::int64_t c[3] = {x, y, z};
    std::int64_t n = d[a];
    if (n == 1) return {};
    std::int64_t lo[3] = {x, y, z};
    std::int64_t hi[3] = {x, y, z};
    double h = 2.0;
    if (c[a] == 0) {
      hi[a] = 1;
      h = 1.0;
    } else if (c[a] == n - 1) {
      lo[a] = n - 2;
      h = 1.0;
    } else {
      lo[a] = c[a] - 1;
      hi[a] = c[a] + 1;
    }
    return (1.0 / h) * (u(hi[0], hi[1], hi[2]) - u(lo[0], lo[1], lo[2]));
  };
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        Vec3 dx = deriv(x, y, z, 0);
        Vec3 dy = deriv(x, y, z, 1);
        Vec3 dz = deriv(x, y, z, 2);
        // J[r][c] = delta_rc + d u_r / d x_c
        double j00 = 1.0 + dx.x, j01 = dy.x, j02 = dz.x;
        double j10 = dx.y, j11 = 1.0 + dy.y, j12 = dz.y;
        double j20 = dx.z, j21 = dy.z, j22 = 1.0 + dz.z;
        out(x, y, z) = j00 * (j11 * j22 - j12 * j21) - j01 * (j10 * j22 - j12 * j20) + j02 * (j10 * j21 - j11 * j20);
      }
    }
  }
  return out;
}

double folding_fraction(const DisplacementField& u) {
  Volume3 det = jacobian_determinant(u);
  std::size_t folded = 0;
  for (double v : det.data()) folded += v <= 0.0;
  return static_cast<double>(folded) / static_cast<double>(det.size());
}

Dims downsampled_dims(const Dims& d) { return {(d.x + 1) / 2, (d.y + 1) / 2, (d.z + 1) / 2}; }

DisplacementField resample_field(const DisplacementField& u, const Dims& target) {
  if (target == u.dims()) return u;
  const Dims src = u.dims();
  std::vector<Vec3> out(target.count());
  for (int c = 0; c < 3; ++c) {
    Volume3 comp(src, {1.0, 1.0, 1.0}, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) comp[i] = u[i][c];
    Volume3 r = resample(comp, target, Interpolation::trilinear);
    double scale = static_cast<double>(target[c]) / static_cast<double>(src[c]);
    for (std::size_t i = 0; i < out.size(); ++i) out[i][c] = scale * r[i];
  }
  return DisplacementField(target, std::move(out), u.level());
}

RegResult register_masks(const BinaryMask& moving, const BinaryMask& fixed, const RegConfig& config) {
  config.validate();
  if (!moving.same_geometry(fixed)) {
    throw ShapeError("register: moving " + to_string(moving.dims()) + " and fixed " + to_string(fixed.dims()) +
                     " differ in dims or spacing");
  }
  // Pyramid, index 0 = full resolution.
  std::vector<Volume3> mov{moving.to_volume()};
  std::vector<Volume3> fix{fixed.to_volume()};
  for (int l = 1; l < config.levels; ++l) {
    Dims next = downsampled_dims(mov.back().dims());
    mov.push_back(resample(mov.back(), next, Interpolation::trilinear));
    fix.push_back(resample(fix.back(), next, Interpolation::trilinear));
  }

  const double alpha_vox = config.alpha_voxel();
  const double k = 2.0 / config.reference_size;
  const double reg_scale = k * k;

  RegResult result;
  DisplacementField u(mov.back().dims(), config.levels - 1);
  DisplacementField grad(u.dims(), u.level());
  for (int level = config.levels - 1; level >= 0; --level) {
    const Volume3& m = mov[static_cast<std::size_t>(level)];
    const Volume3& f = fix[static_cast<std::size_t>(level)];
    if (u.dims() != m.dims()) {
      u = resample_field(u, m.dims());
      grad = DisplacementField(u.dims());
    }
    u = DisplacementField(u.dims(), std::vector<Vec3>(u.data().begin(), u.data().end()), level);
    for (int it = 0; it <= config.iterations_per_level; ++it) {
      const bool step = it < config.iterations_per_level;
      Evaluation e = evaluate(m, f, u, alpha_vox, step ? &grad : nullptr);
      TraceEntry entry{level, it, e.mse, e.reg * reg_scale, 0.0};
      entry.total = entry.mse + config.alpha * entry.reg;
      if (!std::isfinite(entry.total)) {
        throw DivergenceError("registration objective became non-finite at level " + std::to_string(level) +
                              ", iteration " + std::to_string(it));
      }
      result.objective_trace.push_back(entry);
      if (!step) break;
      auto ud = u.data();
      auto gd = grad.data();
      const auto count = static_cast<std::int64_t>(ud.size());
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < count; ++i) {
        auto s = static_cast<std::size_t>(i);
        ud[s] = ud[s] - config.step_size * gd[s];
      }
    }
  }
  result.folding_fraction = folding_fraction(u);
  result.warped = warp_mask(moving, u);
  result.field = std::move(u);
  return result;
}

CasePair synthesize_pair(const CasePair& source, const CasePair& target, const RegConfig& config, RegResult* result) {
  if (!source.defective_skull.same_geometry(target.defective_skull)) {
    throw ShapeError("synthesize_pair: source and target must be sampled to the same grid");
  }
  RegResult r = register_masks(source.defective_skull, target.defective_skull, config);
  CasePair out{r.warped, warp_mask(source.defect, r.field)};
  if (result) *result = std::move(r);
  return out;
}

std::string trace_to_csv(const std::vector<TraceEntry>& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "level,iteration,mse,reg,total\n";
  for (const TraceEntry& e : trace) {
    out << e.level << ',' << e.iteration << ',' << e.mse << ',' << e.reg << ',' << e.total << '\n';
  }
  return out.str();
}

}  // namespace cranaug
