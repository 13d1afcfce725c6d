#pragma once

// OpenMP helpers shared by the voxel kernels.
//
// Reductions are never left to the OpenMP runtime: each z-slice (or other
// fixed block) produces a partial sum and partials are added in index order
// afterwards, so results are bit-identical at any thread count.

#include <cstdint>
#include <vector>

namespace cranaug::parallel {

int max_threads();
void set_threads(int n);

// Calls fn(block) for block in [0, blocks) in parallel and returns the
// ordered sum of the returned partials.
template <typename Fn>
double ordered_sum(std::int64_t blocks, Fn&& fn) {
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    partial[static_cast<std::size_t>(b)] = fn(b);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace cranaug::parallel
