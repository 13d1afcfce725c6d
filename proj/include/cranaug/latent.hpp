#pragma once

// Latent-space sampling strategies for generative decoders, plus the closed
// form KL divergence of a diagonal Gaussian from N(0, I).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cranaug/rng.hpp"

namespace cranaug {

// Ball radius used by the uniform and deterministic strategies: three
// standard deviations of the whitened latent space.
inline constexpr double kLatentRadius = 3.0;

class LatentBatch {
 public:
  LatentBatch(std::size_t dim, std::size_t count);
  LatentBatch(std::size_t dim, std::size_t count, std::vector<double> values);

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> values() const { return values_; }

  double norm(std::size_t i) const;
  bool operator==(const LatentBatch&) const = default;

 private:
  std::size_t dim_;
  std::size_t count_;
  std::vector<double> values_;
};

// i.i.d. N(0, 1) entries.
LatentBatch sample_standard(std::size_t dim, std::size_t count, Rng& rng);

// Uniform in the solid ball of radius 3: Gaussian direction, radius 3 U^(1/dim).
LatentBatch sample_uniform(std::size_t dim, std::size_t count, Rng& rng);

struct UdsOptions {
  // Repulsion sweeps applied to the low-discrepancy seed points.
  int relaxation_sweeps = 50;
};

// Seed-free quasi-uniform point set in the ball of radius 3.
//
// Seed points come from the rank-1 Kronecker sequence frac(0.5 + i * g^-j)
// in [0,1]^(dim+1), g the generalized golden ratio; the first dim coordinates
// go through the normal quantile and are normalized to a direction, the last
// sets the radius 3 u^(1/dim). The set is then spread by a fixed number of
// Jacobi sweeps of s = 16 Riesz-energy repulsion, every point moving a tenth
// of the current minimum distance along its force and projected back into the
// ball. Everything is in a fixed evaluation order, so the output depends
// only on (dim, count, options).
LatentBatch sample_uds(std::size_t dim, std::size_t count, const UdsOptions& options = {});

struct GaussianParams {
  std::vector<double> mu;
  std::vector<double> sigma;
};

// 0.5 * sum(mu^2 + sigma^2 - 1 - ln sigma^2). DomainError on sigma <= 0.
double kl_standard_normal(const GaussianParams& p);

// Exact minimum Euclidean distance over all pairs; InsufficientDataError if
// count < 2.
double min_pairwise_distance(const LatentBatch& batch);

// Acklam's rational approximation refined by one Halley step.
double normal_quantile(double p);

std::string batch_to_csv(const LatentBatch& batch);

}  // namespace cranaug
