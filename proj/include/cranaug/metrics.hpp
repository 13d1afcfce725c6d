#pragma once

// Overlap and surface-distance metrics for binary reconstructions.
//
// Surface distances use one pooled multiset: for every surface voxel of a,
// its distance to the surface of b, and for every surface voxel of b, its
// distance to the surface of a. HD95 is the 95th percentile of that multiset
// (linear interpolation between order statistics), MSD its mean.

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "cranaug/volume.hpp"

namespace cranaug {

inline constexpr double kDefaultSurfaceTolerance = 1.0;  // mm

// Reported for hd95 / msd when exactly one of the masks is empty.
inline constexpr double kUndefinedDistance = std::numeric_limits<double>::quiet_NaN();

struct MetricsReport {
  double dsc = 0.0;
  double sdsc = 0.0;
  double hd95 = 0.0;
  double msd = 0.0;
  double bdsc = 0.0;
};

double dsc(const BinaryMask& a, const BinaryMask& b);

struct SoftDiceResult {
  double loss = 0.0;
  Volume3 gradient;
};

inline constexpr double kSoftDiceEpsilon = 1e-6;

// loss = 1 - (2 sum(p g) + eps) / (sum(p) + sum(g) + eps)
SoftDiceResult soft_dice_loss(const Volume3& p, const BinaryMask& g);

// Sentinel for voxels with no foreground anywhere in the grid.
inline constexpr double kNoForeground = std::numeric_limits<double>::infinity();

// Squared Euclidean distance (mm^2) from each voxel to the nearest foreground
// voxel, by separable lower envelopes of parabolas. All-background input gives
// kNoForeground everywhere.
Volume3 edt_squared(const BinaryMask& m, const Spacing& spacing);
Volume3 edt(const BinaryMask& m, const Spacing& spacing);

struct SurfacePointSet {
  std::vector<Vec3> points;          // mm
  std::vector<std::size_t> indices;  // linear voxel index, ascending
};

// Foreground voxels with at least one background 6-neighbor; outside the grid
// counts as background.
SurfacePointSet surface_voxels(const BinaryMask& m, const Spacing& spacing);
BinaryMask surface_mask(const BinaryMask& m);

// Pooled symmetric surface distances in mm, surf(a) entries first.
std::vector<double> pooled_surface_distances(const BinaryMask& a, const BinaryMask& b,
                                             const Spacing& spacing);

// numpy-style linear percentile, q in [0, 100]. Input need not be sorted.
double percentile(std::vector<double> values, double q);

double hd95(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing);
double msd(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing);
double sdsc(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing, double tau);
// sdsc at a tolerance of one voxel (largest spacing component).
double bdsc(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing);

// All five metrics from one pass. Both empty: (1, 1, 0, 0, 1). Exactly one
// empty: dsc 0, sdsc and bdsc 0, hd95 and msd kUndefinedDistance.
MetricsReport compute_metrics(const BinaryMask& a, const BinaryMask& b, const Spacing& spacing,
                              double tau = kDefaultSurfaceTolerance);

// Brings pred from model resolution back to the native grid (nearest
// resampling, then the inverse of the recorded centering translation) and
// scores it against gt at native spacing.
MetricsReport evaluate_case(const BinaryMask& pred, const BinaryMask& gt, const Dims& native_dims,
                            const Spacing& spacing, double tau = kDefaultSurfaceTolerance,
                            std::optional<Translation> centering = std::nullopt);

}  // namespace cranaug
