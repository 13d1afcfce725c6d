#pragma once

#include <cstdint>
#include <vector>

#include "cranaug/volume.hpp"

namespace cranaug {

enum class Connectivity { six = 6, twenty_six = 26 };

struct ComponentLabels {
  Grid<std::uint32_t> labels;       // 0 = background, components 1..n
  std::vector<std::size_t> sizes;   // sizes[k] is the voxel count of label k + 1
  std::size_t count() const { return sizes.size(); }
};

// Two-pass union-find labeling. Labels are numbered in raster order of each
// component's first voxel.
ComponentLabels connected_components(const BinaryMask& m, Connectivity connectivity);

enum class RemovalRule {
  // remove a component if it is small OR touches the defective skull
  small_or_overlapping,
  // remove only components that are small AND touch the defective skull
  small_and_overlapping,
};

BinaryMask postprocess(const BinaryMask& pred, const BinaryMask& defective_skull,
                       std::size_t min_volume, Connectivity connectivity,
                       RemovalRule rule = RemovalRule::small_or_overlapping);

}  // namespace cranaug
