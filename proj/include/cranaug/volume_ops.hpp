#pragma once

#include <utility>

#include "cranaug/affine.hpp"
#include "cranaug/volume.hpp"

namespace cranaug {

enum class Interpolation { nearest, trilinear };

// Trilinear interpolation at continuous voxel coordinate p. Corners that fall
// outside the grid read as 0, so anything more than one voxel outside is 0.
double sample_trilinear(const Volume3& v, const Vec3& p);

// Value and analytic gradient (d/dx, d/dy, d/dz) of the trilinear interpolant.
// Inside a cell the interpolant is smooth; on cell faces the gradient of the
// cell containing floor(p) is returned.
double sample_trilinear_grad(const Volume3& v, const Vec3& p, Vec3& grad);

// Resample to target dims preserving physical extent. Voxel centers are
// aligned: source coordinate = (i + 0.5) * n_src / n_dst - 0.5.
// Trilinear mode clamps to the edge voxel rather than padding with zero.
Volume3 resample(const Volume3& v, const Dims& target, Interpolation mode);
BinaryMask resample(const BinaryMask& m, const Dims& target);  // nearest

// voxel -> 1 iff value > threshold
BinaryMask binarize(const Volume3& v, double threshold = 0.5);

// Backward-mapped affine: each output voxel samples the input at the inverse
// transformed coordinate (trilinear, zero outside) and thresholds at 0.5.
BinaryMask apply_affine(const BinaryMask& m, const AffineTransform& t);
BinaryMask apply_affine(const BinaryMask& m, const Matrix4& forward);

// Integer shift; voxels leaving the grid are dropped.
BinaryMask translate(const BinaryMask& m, const Translation& t);

// Reverses the mask along axis 0 (x), 1 (y) or 2 (z).
BinaryMask flip(const BinaryMask& m, int axis);

struct BoundingBox {
  Dims lo{0, 0, 0};
  Dims hi{0, 0, 0};  // inclusive
};

// Throws EmptyInputError on an empty mask.
BoundingBox bounding_box(const BinaryMask& m);

// Moves the tight bounding box to the grid center (lower-biased by half a
// voxel when the slack is odd). Requires extent + 2 * offset <= dims on every
// axis. The returned translation undoes nothing by itself: apply its
// inverse() with translate() to go back.
std::pair<BinaryMask, Translation> center_with_offset(const BinaryMask& m, std::int64_t offset);

}  // namespace cranaug
