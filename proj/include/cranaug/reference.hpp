#pragma once

// Serial reference versions of the parallel kernels. Straight loops, plain
// left-to-right sums; kept for tests and the kernel benchmark.

#include "cranaug/latent.hpp"
#include "cranaug/registration.hpp"
#include "cranaug/volume.hpp"

namespace cranaug::reference {

Volume3 warp(const Volume3& v, const DisplacementField& u);
double mse(const Volume3& a, const Volume3& b);
double diffusive_reg(const DisplacementField& u);
DisplacementField objective_gradient(const Volume3& moving, const Volume3& fixed,
                                     const DisplacementField& u, double alpha);
Volume3 jacobian_determinant(const DisplacementField& u);
Volume3 edt_squared(const BinaryMask& m, const Spacing& spacing);
double min_pairwise_distance(const LatentBatch& batch);

}  // namespace cranaug::reference
