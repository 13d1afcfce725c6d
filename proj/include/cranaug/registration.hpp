#pragma once

// Multi-level instance-optimization registration of binary volumes:
//
//   minimize  mse(M o u, F) + alpha * reg(u)
//
// by plain gradient descent on a coarse-to-fine pyramid, stopped after a
// fixed iteration budget so the warped moving image is an intermediate shape
// between M and F.

#include <cstdint>
#include <string>
#include <vector>

#include "cranaug/geo_aug.hpp"
#include "cranaug/volume.hpp"

namespace cranaug {

// Per-voxel displacement in voxel units; output(x) samples input(x + u(x)).
class DisplacementField {
 public:
  DisplacementField() = default;
  explicit DisplacementField(Dims dims, int level = 0);
  DisplacementField(Dims dims, std::vector<Vec3> data, int level = 0);

  const Dims& dims() const { return dims_; }
  int level() const { return level_; }
  std::size_t size() const { return data_.size(); }
  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>(x + dims_.x * (y + dims_.y * z));
  }

  const Vec3& operator()(std::int64_t x, std::int64_t y, std::int64_t z) const { return data_[index(x, y, z)]; }
  Vec3& operator()(std::int64_t x, std::int64_t y, std::int64_t z) { return data_[index(x, y, z)]; }
  const Vec3& operator[](std::size_t i) const { return data_[i]; }
  Vec3& operator[](std::size_t i) { return data_[i]; }

  std::span<const Vec3> data() const { return data_; }
  std::span<Vec3> data() { return data_; }

  bool all_finite() const;
  double mean_magnitude() const;

  bool operator==(const DisplacementField&) const = default;

 private:
  Dims dims_{};
  int level_ = 0;
  std::vector<Vec3> data_ = std::vector<Vec3>(1);
};

// alpha is defined against the regularizer of a field expressed in normalized
// [-1, 1] coordinates of a reference_size^3 grid: the effective voxel-unit
// weight is alpha * (2 / reference_size)^2 at every pyramid level.
// Descent steps on N * gradient; the diffusive part is stable only while
// step_size * alpha_voxel() < 0.25.
struct RegConfig {
  int levels = 3;
  int iterations_per_level = 50;
  double step_size = 0.04;
  double alpha = 12500.0;
  double reference_size = 256.0;

  void validate() const;  // throws ValidationError
  double alpha_voxel() const;
  bool operator==(const RegConfig&) const = default;
};

// The regularization coefficients of the published sweep.
inline constexpr double kAlphaSweep[] = {6250.0, 12500.0, 25000.0, 50000.0, 100000.0};
inline constexpr double kDefaultAlpha = 12500.0;

struct TraceEntry {
  int level = 0;
  int iteration = 0;
  double mse = 0.0;
  double reg = 0.0;
  double total = 0.0;
};

struct RegResult {
  DisplacementField field;
  BinaryMask warped;
  std::vector<TraceEntry> objective_trace;
  double folding_fraction = 0.0;
};

struct ObjectiveTerms {
  double total = 0.0;
  double mse = 0.0;
  double reg = 0.0;
};

// Backward warp: output(x) = sample_trilinear(v, x + u(x)). ShapeError on
// dims mismatch.
Volume3 warp(const Volume3& v, const DisplacementField& u);
BinaryMask warp_mask(const BinaryMask& m, const DisplacementField& u);

double mse(const Volume3& a, const Volume3& b);

// Mean over voxels and the three components of the squared forward-difference
// gradient magnitude. Differences across the last face along an axis are 0.
double diffusive_reg(const DisplacementField& u);

// total = mse(warp(M, u), F) + alpha * diffusive_reg(u); alpha is used as is.
ObjectiveTerms objective(const Volume3& moving, const Volume3& fixed,
                         const DisplacementField& u, double alpha);

// Exact gradient of objective() w.r.t. every component of u. The data term
// uses the analytic derivative of the trilinear interpolant; the regularizer
// term is -2 alpha / (3 N) times the Neumann Laplacian of u.
DisplacementField objective_gradient(const Volume3& moving, const Volume3& fixed,
                                     const DisplacementField& u, double alpha);

// det(I + grad u), central differences inside, one-sided on boundary voxels.
Volume3 jacobian_determinant(const DisplacementField& u);
double folding_fraction(const DisplacementField& u);

// Factor-2 pyramid helpers. Field values are rescaled with resolution.
Dims downsampled_dims(const Dims& d);
DisplacementField resample_field(const DisplacementField& u, const Dims& target);

// Throws ShapeError, DivergenceError naming the iteration.
RegResult register_masks(const BinaryMask& moving, const BinaryMask& fixed, const RegConfig& config);

// Registers source.defective_skull onto target.defective_skull and warps both
// source channels with the one resulting field.
CasePair synthesize_pair(const CasePair& source, const CasePair& target, const RegConfig& config,
                         RegResult* result = nullptr);

// CSV with header level,iteration,mse,reg,total
std::string trace_to_csv(const std::vector<TraceEntry>& trace);

}  // namespace cranaug
