#include "cranaug/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cranaug/error.hpp"

namespace cranaug {

LatentBatch::LatentBatch(std::size_t dim, std::size_t count) : LatentBatch(dim, count, std::vector<double>(dim * count)) {}

LatentBatch::LatentBatch(std::size_t dim, std::size_t count, std::vector<double> values)
    : dim_(dim), count_(count), values_(std::move(values)) {
  if (dim_ < 1 || count_ < 1) throw ValidationError("latent batch needs dim >= 1 and count >= 1");
  if (values_.size() != dim_ * count_) throw ShapeError("latent batch value count does not match dim x count");
}

double LatentBatch::norm(std::size_t i) const {
  double s = 0.0;
  for (double v : row(i)) s += v * v;
  return std::sqrt(s);
}

LatentBatch sample_standard(std::size_t dim, std::size_t count, Rng& rng) {
  LatentBatch b(dim, count);
  for (std::size_t i = 0; i < count; ++i) {
    for (double& v : b.row(i)) v = rng.normal();
  }
  return b;
}

namespace {

// Scales row so its norm is `radius`.
void set_norm(std::span<double> row, double radius) {
  double s = 0.0;
  for (double v : row) s += v * v;
  double n = std::sqrt(s);
  if (n == 0.0) {
    row[0] = radius;
    return;
  }
  for (double& v : row) v *= radius / n;
}

}  // namespace

LatentBatch sample_uniform(std::size_t dim, std::size_t count, Rng& rng) {
  LatentBatch b(dim, count);
  for (std::size_t i = 0; i < count; ++i) {
    auto row = b.row(i);
    for (double& v : row) v = rng.normal();
    double r = kLatentRadius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
    set_norm(row, r);
  }
  return b;
}

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against erfc brings it to near machine precision.
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

namespace {

// Generalized golden ratio: the positive root of g^(d+1) = g + 1.
double generalized_golden(std::size_t d) {
  double g = 2.0;
  for (int i = 0; i < 64; ++i) g = std::pow(1.0 + g, 1.0 / static_cast<double>(d + 1));
  return g;
}

LatentBatch kronecker_ball(std::size_t dim, std::size_t count) {
  const std::size_t cols = dim + 1;
  const double g = generalized_golden(cols);
  std::vector<double> step(cols);
  double inv = 1.0;
  for (std::size_t j = 0; j < cols; ++j) {
    inv /= g;
    step[j] = inv;
  }
  LatentBatch b(dim, count);
  std::vector<double> u(cols);
  for (std::size_t i = 0; i < count; ++i) {
    const double k = static_cast<double>(i + 1);
    for (std::size_t j = 0; j < cols; ++j) {
      double v = 0.5 + k * step[j];
      u[j] = v - std::floor(v);
    }
    auto row = b.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] = normal_quantile(u[j]);
    double r = kLatentRadius * std::pow(u[dim], 1.0 / static_cast<double>(dim));
    set_norm(row, r);
  }
  return b;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// Minimum squared distance from row i to every other row, and the repulsive
// force on it from a (dmin2 / d2)^9 weighted s = 16 Riesz energy.
void relax_forces(const LatentBatch& b, double dmin2, std::vector<double>& force) {
  const std::size_t n = b.count();
  const std::size_t dim = b.dim();
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    auto i = static_cast<std::size_t>(ii);
    double* f = force.data() + i * dim;
    std::fill(f, f + dim, 0.0);
    auto xi = b.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto xj = b.row(j);
      double d2 = squared_distance(xi, xj);
      double r = dmin2 / d2;
      double r2 = r * r;
      double r4 = r2 * r2;
      double w = r4 * r4 * r;  // r^9
      for (std::size_t k = 0; k < dim; ++k) f[k] += w * (xi[k] - xj[k]);
    }
  }
}

}  // namespace

LatentBatch sample_uds(std::size_t dim, std::size_t count, const UdsOptions& options) {
  LatentBatch b = kronecker_ball(dim, count);
  if (count < 2) return b;
  std::vector<double> force(dim * count);
  for (int sweep = 0; sweep < options.relaxation_sweeps; ++sweep) {
    double dmin = min_pairwise_distance(b);
    if (dmin == 0.0) break;
    relax_forces(b, dmin * dmin, force);
    for (std::size_t i = 0; i < count; ++i) {
      const double* f = force.data() + i * dim;
      double fn = 0.0;
      for (std::size_t k = 0; k < dim; ++k) fn += f[k] * f[k];
      fn = std::sqrt(fn);
      if (fn == 0.0) continue;
      auto row = b.row(i);
      const double move = 0.1 * dmin / fn;
      for (std::size_t k = 0; k < dim; ++k) row[k] += move * f[k];
      double r = b.norm(i);
      if (r > kLatentRadius) {
        for (double& v : row) v *= kLatentRadius / r;
      }
    }
  }
  return b;
}

double kl_standard_normal(const GaussianParams& p) {
  if (p.mu.size() != p.sigma.size()) throw ShapeError("kl: mu and sigma lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < p.mu.size(); ++i) {
    double sg = p.sigma[i];
    if (!(sg > 0.0)) throw DomainError("kl: sigma must be > 0, got " + std::to_string(sg) + " at index " + std::to_string(i));
    double var = sg * sg;
    s += p.mu[i] * p.mu[i] + var - 1.0 - std::log(var);
  }
  return 0.5 * s;
}

double min_pairwise_distance(const LatentBatch& batch) {
  const std::size_t n = batch.count();
  if (n < 2) throw InsufficientDataError("min_pairwise_distance needs at least 2 vectors");
  std::vector<double> row_min(n, std::numeric_limits<double>::infinity());
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    auto i = static_cast<std::size_t>(ii);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n; ++j) m = std::min(m, squared_distance(batch.row(i), batch.row(j)));
    row_min[i] = m;
  }
  return std::sqrt(*std::min_element(row_min.begin(), row_min.end()));
}

std::string batch_to_csv(const LatentBatch& batch) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < batch.count(); ++i) {
    auto row = batch.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << '\n';
  }
  return out.str();
}

}  // namespace cranaug
