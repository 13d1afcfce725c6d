#pragma once

// Test fixtures and brute-force oracles. Nothing here calls the library
// kernel it is meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "cranaug/volume.hpp"

namespace testing {

using namespace cranaug;

// Independent of the library RNG on purpose.
inline BinaryMask random_mask(const Dims& d, std::uint64_t seed, double density, Spacing spacing = {1, 1, 1}) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution on(density);
  BinaryMask m(d, spacing);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, on(gen));
  return m;
}

// Random mask made of a few axis-aligned boxes, giving larger structures
// than i.i.d. voxels.
inline BinaryMask random_boxes(const Dims& d, std::uint64_t seed, int boxes) {
  std::mt19937_64 gen(seed);
  BinaryMask m(d);
  for (int k = 0; k < boxes; ++k) {
    std::int64_t lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      std::uniform_int_distribution<std::int64_t> pick(0, d[a] - 1);
      lo[a] = pick(gen);
      hi[a] = std::min(d[a] - 1, lo[a] + pick(gen) / 3);
    }
    for (std::int64_t z = lo[2]; z <= hi[2]; ++z)
      for (std::int64_t y = lo[1]; y <= hi[1]; ++y)
        for (std::int64_t x = lo[0]; x <= hi[0]; ++x) m.set(x, y, z, true);
  }
  return m;
}

struct Point {
  std::int64_t x, y, z;
};

inline std::vector<Point> foreground(const BinaryMask& m) {
  std::vector<Point> pts;
  const Dims d = m.dims();
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x)
        if (m(x, y, z)) pts.push_back({x, y, z});
  return pts;
}

inline double squared_mm(const Point& a, const Point& b, const Spacing& s) {
  double dx = (a.x - b.x) * s.x, dy = (a.y - b.y) * s.y, dz = (a.z - b.z) * s.z;
  return dx * dx + dy * dy + dz * dz;
}

// Squared distance to the nearest foreground voxel by exhaustive search.
inline std::vector<double> brute_edt_squared(const BinaryMask& m, const Spacing& s) {
  const std::vector<Point> fg = foreground(m);
  const Dims d = m.dims();
  std::vector<double> out(m.size(), std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x, ++i)
        for (const Point& p : fg) out[i] = std::min(out[i], squared_mm({x, y, z}, p, s));
  return out;
}

// Foreground voxels with a background (or out-of-grid) face neighbour.
inline std::vector<Point> brute_surface(const BinaryMask& m) {
  auto on = [&](std::int64_t x, std::int64_t y, std::int64_t z) { return m.contains(x, y, z) && m(x, y, z); };
  std::vector<Point> pts;
  for (const Point& p : foreground(m)) {
    const std::int64_t n[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    bool edge = false;
    for (const auto& o : n) edge = edge || !on(p.x + o[0], p.y + o[1], p.z + o[2]);
    if (edge) pts.push_back(p);
  }
  return pts;
}

// d(x, surf(b)) for x in surf(a), then d(y, surf(a)) for y in surf(b).
inline std::vector<double> brute_pooled(const BinaryMask& a, const BinaryMask& b, const Spacing& s) {
  const auto sa = brute_surface(a);
  const auto sb = brute_surface(b);
  std::vector<double> out;
  auto directed = [&](const std::vector<Point>& from, const std::vector<Point>& to) {
    for (const Point& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point& q : to) best = std::min(best, squared_mm(p, q, s));
      out.push_back(std::sqrt(best));
    }
  };
  directed(sa, sb);
  directed(sb, sa);
  return out;
}

inline double brute_percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  std::size_t hi = lo + 1 < v.size() ? lo + 1 : lo;
  double t = pos - static_cast<double>(lo);
  return v[lo] + t * (v[hi] - v[lo]);
}

inline double brute_dsc(const BinaryMask& a, const BinaryMask& b) {
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i];
    nb += b[i];
    both += a[i] && b[i];
  }
  return na + nb == 0 ? 1.0 : 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

struct FloodLabels {
  std::vector<std::uint32_t> labels;
  std::vector<std::size_t> sizes;
};

// BFS labeling, seeds visited in raster order.
inline FloodLabels flood_fill(const BinaryMask& m, int connectivity) {
  const Dims d = m.dims();
  FloodLabels r;
  r.labels.assign(m.size(), 0);
  std::vector<Point> offsets;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (connectivity == 6 && manhattan != 1) continue;
        offsets.push_back({dx, dy, dz});
      }
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x) {
        if (!m(x, y, z) || r.labels[m.index(x, y, z)]) continue;
        auto label = static_cast<std::uint32_t>(r.sizes.size() + 1);
        std::size_t size = 0;
        std::deque<Point> queue{{x, y, z}};
        r.labels[m.index(x, y, z)] = label;
        while (!queue.empty()) {
          Point p = queue.front();
          queue.pop_front();
          ++size;
          for (const Point& o : offsets) {
            Point q{p.x + o.x, p.y + o.y, p.z + o.z};
            if (!m.contains(q.x, q.y, q.z) || !m(q.x, q.y, q.z)) continue;
            auto& l = r.labels[m.index(q.x, q.y, q.z)];
            if (l) continue;
            l = label;
            queue.push_back(q);
          }
        }
        r.sizes.push_back(size);
      }
  return r;
}

// Two-sided exact signed-rank p by enumerating all 2^n sign patterns of the
// tie-averaged ranks of the non-zero differences.
inline double enumerate_signed_rank_p(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double v : diffs)
    if (v != 0.0) d.push_back(v);
  const std::size_t n = d.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++less;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    rank[i] = less + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) observed += rank[i];
  std::uint64_t le = 0, ge = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += rank[i];
    if (w <= observed + 1e-9) ++le;
    if (w >= observed - 1e-9) ++ge;
  }
  double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
  return std::min(1.0, p);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cranaug_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
