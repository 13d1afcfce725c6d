#include "cranaug/components.hpp"

#include <array>
#include <numeric>

namespace cranaug {

namespace {

class DisjointSets {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller root wins so the representative is the earliest provisional label.
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

ComponentLabels connected_components(const BinaryMask& m, Connectivity connectivity) {
  const Dims d = m.dims();
  ComponentLabels out{Grid<std::uint32_t>(d, m.spacing(), 0u), {}};
  auto& labels = out.labels;
  DisjointSets sets;
  sets.make();  // provisional label 0 is background

  // Backward neighbors already visited in raster order.
  std::vector<std::array<std::int64_t, 3>> back;
  for (std::int64_t dz = -1; dz <= 0; ++dz) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        if (dz == 0 && (dy > 0 || (dy == 0 && dx >= 0))) continue;
        int manhattan = static_cast<int>((dx != 0) + (dy != 0) + (dz != 0));
        if (connectivity == Connectivity::six && manhattan != 1) continue;
        back.push_back({dx, dy, dz});
      }
    }
  }

  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        if (!m(x, y, z)) continue;
        std::uint32_t current = 0;
        for (const auto& o : back) {
          std::int64_t nx = x + o[0], ny = y + o[1], nz = z + o[2];
          if (!labels.contains(nx, ny, nz)) continue;
          std::uint32_t l = labels(nx, ny, nz);
          if (l == 0) continue;
          if (current == 0) {
            current = l;
          } else if (l != current) {
            sets.unite(current, l);
          }
        }
        labels(x, y, z) = current == 0 ? sets.make() : current;
      }
    }
  }

  // Compact representatives to 1..n in order of first appearance.
  std::vector<std::uint32_t> remap(sets.size(), 0);
  std::uint32_t next = 0;
  for (auto& l : labels.data()) {
    if (l == 0) continue;
    std::uint32_t root = sets.find(l);
    if (remap[root] == 0) {
      remap[root] = ++next;
      out.sizes.push_back(0);
    }
    l = remap[root];
    ++out.sizes[l - 1];
  }
  return out;
}

BinaryMask postprocess(const BinaryMask& pred, const BinaryMask& defective_skull, std::size_t min_volume,
                       Connectivity connectivity, RemovalRule rule) {
  if (pred.dims() != defective_skull.dims()) {
    throw ShapeError("postprocess: prediction " + to_string(pred.dims()) + " vs defective skull " +
                     to_string(defective_skull.dims()));
  }
  ComponentLabels cc = connected_components(pred, connectivity);
  std::vector<bool> touches(cc.count(), false);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::uint32_t l = cc.labels[i];
    if (l != 0 && defective_skull[i]) touches[l - 1] = true;
  }
  std::vector<bool> keep(cc.count());
  for (std::size_t k = 0; k < cc.count(); ++k) {
    bool small = cc.sizes[k] < min_volume;
    bool remove = rule == RemovalRule::small_or_overlapping ? (small || touches[k]) : (small && touches[k]);
    keep[k] = !remove;
  }
  BinaryMask out(pred.dims(), pred.spacing());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::uint32_t l = cc.labels[i];
    if (l != 0 && keep[l - 1]) out.set(i, true);
  }
  return out;
}

}  // namespace cranaug
