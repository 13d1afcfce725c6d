#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cranaug/metrics.hpp"
#include "cranaug/parallel.hpp"
#include "cranaug/phantoms.hpp"
#include "cranaug/reference.hpp"
#include "cranaug/volume_ops.hpp"
#include "support.hpp"

using namespace cranaug;

namespace {

BinaryMask cube(const Dims& d, std::int64_t x0, std::int64_t y0, std::int64_t z0, std::int64_t side) {
  BinaryMask m(d);
  for (std::int64_t z = z0; z < z0 + side; ++z)
    for (std::int64_t y = y0; y < y0 + side; ++y)
      for (std::int64_t x = x0; x < x0 + side; ++x) m.set(x, y, z, true);
  return m;
}

// Two parallel 1-voxel-thick plates `gap` voxels apart along x.
std::pair<BinaryMask, BinaryMask> plates(std::int64_t gap) {
  const Dims d{16, 8, 8};
  BinaryMask a(d), b(d);
  for (std::int64_t z = 0; z < 8; ++z)
    for (std::int64_t y = 0; y < 8; ++y) {
      a.set(2, y, z, true);
      b.set(2 + gap, y, z, true);
    }
  return {a, b};
}

}  // namespace

TEST_CASE("dsc") {
  const Dims d{6, 6, 6};
  CHECK(dsc(cube(d, 0, 0, 0, 2), cube(d, 1, 0, 0, 2)) == 0.5);
  CHECK(dsc(cube(d, 0, 0, 0, 2), cube(d, 0, 0, 0, 2)) == 1.0);
  CHECK(dsc(BinaryMask(d), BinaryMask(d)) == 1.0);
  CHECK(dsc(cube(d, 0, 0, 0, 2), BinaryMask(d)) == 0.0);
  CHECK_THROWS_AS(dsc(BinaryMask(d), BinaryMask({6, 6, 5})), ShapeError);
  for (std::uint64_t s = 0; s < 10; ++s) {
    BinaryMask a = testing::random_mask(d, s, 0.4), b = testing::random_mask(d, s + 100, 0.4);
    CHECK(dsc(a, b) == testing::brute_dsc(a, b));
    CHECK(dsc(a, b) == dsc(b, a));
  }
}

TEST_CASE("soft dice loss") {
  const Dims d{4, 4, 4};
  BinaryMask g = cube(d, 0, 0, 0, 2);
  SoftDiceResult perfect = soft_dice_loss(g.to_volume(), g);
  CHECK(perfect.loss == doctest::Approx(0.0).epsilon(1e-9));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int t = 0; t < 5; ++t) {
    BinaryMask gt = testing::random_mask({8, 8, 8}, 50 + t, 0.3);
    Volume3 p({8, 8, 8}, {1, 1, 1}, 0.0);
    for (double& v : p.data()) v = u(gen);
    SoftDiceResult r = soft_dice_loss(p, gt);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); i += 5) {
      const double h = 1e-5;
      Volume3 up = p, dn = p;
      up[i] += h;
      dn[i] -= h;
      double fd = (soft_dice_loss(up, gt).loss - soft_dice_loss(dn, gt).loss) / (2 * h);
      worst = std::max(worst, std::abs(r.gradient[i] - fd) / std::abs(fd));
    }
    CHECK(worst < 1e-4);
  }
  Volume3 bad = g.to_volume();
  bad[3] = 1.5;
  CHECK_THROWS_AS(soft_dice_loss(bad, g), DomainError);
}

TEST_CASE("euclidean distance transform") {
  BinaryMask one({8, 8, 8});
  one.set(0, 0, 0, true);
  CHECK(edt(one, {1, 1, 1})(3, 4, 0) == 5.0);
  CHECK(edt_squared(one, {1, 1, 2})(1, 1, 1) == 6.0);
  Volume3 none = edt_squared(BinaryMask({3, 3, 3}), {1, 1, 1});
  for (double v : none.data()) CHECK(v == kNoForeground);

  parallel::set_threads(4);
  for (Spacing s : {Spacing{1, 1, 1}, Spacing{0.5, 1, 2}}) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      BinaryMask m = testing::random_mask({11, 9, 7}, seed, 0.02 + 0.05 * double(seed), s);
      Volume3 e = edt_squared(m, s);
      std::vector<double> brute = testing::brute_edt_squared(m, s);
      Volume3 r = reference::edt_squared(m, s);
      bool same = true;
      for (std::size_t i = 0; i < m.size(); ++i) same = same && e[i] == brute[i] && r[i] == brute[i];
      CHECK(same);
    }
  }
  parallel::set_threads(parallel::max_threads());
}

TEST_CASE("surface extraction") {
  const Dims d{5, 5, 5};
  CHECK(surface_mask(cube(d, 1, 1, 1, 3)).count() == 26);
  CHECK(surface_mask(cube(d, 0, 0, 0, 5)).count() == 125 - 27);
  SurfacePointSet s = surface_voxels(cube(d, 1, 1, 1, 1), {2, 1, 1});
  REQUIRE(s.points.size() == 1);
  CHECK(s.points[0] == Vec3{2, 1, 1});
  CHECK(s.indices[0] == std::size_t(1 + 5 * (1 + 5 * 1)));

  BinaryMask m = testing::random_mask({9, 9, 9}, 3, 0.6);
  auto brute = testing::brute_surface(m);
  SurfacePointSet lib = surface_voxels(m, {1, 1, 1});
  REQUIRE(lib.indices.size() == brute.size());
  for (std::size_t k = 0; k < brute.size(); ++k) CHECK(lib.indices[k] == m.index(brute[k].x, brute[k].y, brute[k].z));
}

TEST_CASE("percentile") {
  CHECK(percentile({1, 2, 3, 4}, 50) == 2.5);
  CHECK(percentile({5, 1, 3}, 0) == 1.0);
  CHECK(percentile({5, 1, 3}, 100) == 5.0);
  CHECK(percentile({7}, 95) == 7.0);
  CHECK(percentile({0, 10}, 95) == doctest::Approx(9.5));
  CHECK_THROWS_AS(percentile({}, 50), EmptyInputError);
}

TEST_CASE("surface distance metrics") {
  SUBCASE("plates five voxels apart") {
    auto [a, b] = plates(5);
    CHECK(hd95(a, b, {1, 1, 1}) == 5.0);
    CHECK(msd(a, b, {1, 1, 1}) == 5.0);
    CHECK(sdsc(a, b, {1, 1, 1}, 4.9) == 0.0);
    CHECK(sdsc(a, b, {1, 1, 1}, 5.0) == 1.0);
    CHECK(bdsc(a, b, {1, 1, 1}) == 0.0);
    CHECK(hd95(a, b, {2, 1, 1}) == 10.0);
  }
  SUBCASE("adjacent plates are within one voxel") {
    auto [a, b] = plates(1);
    CHECK(bdsc(a, b, {1, 1, 1}) == 1.0);
    CHECK(bdsc(a, b, {1, 1, 3}) == 1.0);
    CHECK(sdsc(a, b, {1, 1, 1}, 0.5) == 0.0);
  }
  SUBCASE("identical masks") {
    BinaryMask m = phantoms::smooth_blob({20, 20, 20}, 2, 6);
    MetricsReport r = compute_metrics(m, m, {1, 1, 1});
    CHECK(r.dsc == 1.0);
    CHECK(r.hd95 == 0.0);
    CHECK(r.msd == 0.0);
    CHECK(r.sdsc == 1.0);
    CHECK(r.bdsc == 1.0);
  }
  SUBCASE("agree with brute force and are symmetric") {
    for (Spacing s : {Spacing{1, 1, 1}, Spacing{0.5, 1, 2}}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        BinaryMask a = testing::random_boxes({12, 12, 12}, seed, 4);
        BinaryMask b = testing::random_boxes({12, 12, 12}, seed + 50, 4);
        std::vector<double> pooled = testing::brute_pooled(a, b, s);
        CHECK(pooled_surface_distances(a, b, s) == pooled);
        double mean = 0.0;
        for (double v : pooled) mean += v;
        mean /= double(pooled.size());
        std::size_t within = 0;
        for (double v : pooled) within += v <= 1.5;
        MetricsReport r = compute_metrics(a, b, s, 1.5);
        CHECK(r.hd95 == testing::brute_percentile(pooled, 95));
        CHECK(r.msd == mean);
        CHECK(r.sdsc == double(within) / double(pooled.size()));
        MetricsReport q = compute_metrics(b, a, s, 1.5);
        CHECK(q.hd95 == r.hd95);
        CHECK(q.sdsc == r.sdsc);
        CHECK(q.msd == doctest::Approx(r.msd).epsilon(1e-14));
      }
    }
  }
  SUBCASE("empty masks") {
    const Dims d{6, 6, 6};
    MetricsReport both = compute_metrics(BinaryMask(d), BinaryMask(d), {1, 1, 1});
    CHECK(both.dsc == 1.0);
    CHECK(both.sdsc == 1.0);
    CHECK(both.bdsc == 1.0);
    CHECK(both.hd95 == 0.0);
    CHECK(both.msd == 0.0);
    MetricsReport one = compute_metrics(cube(d, 1, 1, 1, 2), BinaryMask(d), {1, 1, 1});
    CHECK(one.dsc == 0.0);
    CHECK(one.sdsc == 0.0);
    CHECK(one.bdsc == 0.0);
    CHECK(std::isnan(one.hd95));
    CHECK(std::isnan(one.msd));
    CHECK_THROWS_AS(hd95(cube(d, 1, 1, 1, 2), BinaryMask(d), {1, 1, 1}), EmptyInputError);
    CHECK_THROWS_AS(sdsc(cube(d, 1, 1, 1, 2), cube(d, 1, 1, 1, 2), {1, 1, 1}, -1.0), DomainError);
  }
}

TEST_CASE("evaluate case") {
  BinaryMask gt = phantoms::smooth_blob({24, 24, 24}, 4, 7);
  SUBCASE("same grid, no centering") {
    MetricsReport r = evaluate_case(gt, gt, gt.dims(), {1, 1, 1});
    CHECK(r.dsc == 1.0);
    CHECK(r.hd95 == 0.0);
  }
  SUBCASE("centering is undone before scoring") {
    Translation t{3, -2, 1};
    MetricsReport r = evaluate_case(translate(gt, t), gt, gt.dims(), {1, 1, 1}, 1.0, t);
    CHECK(r.dsc == 1.0);
    MetricsReport off = evaluate_case(translate(gt, t), gt, gt.dims(), {1, 1, 1});
    CHECK(off.dsc < 1.0);
    CHECK(off.hd95 > 0.0);
  }
  SUBCASE("prediction at a coarser grid is resampled") {
    // Nearest upsampling by two replicates each coarse voxel into a 2^3 block.
    BinaryMask coarse = testing::random_boxes({12, 12, 12}, 9, 3);
    BinaryMask blocks({24, 24, 24});
    for (std::int64_t z = 0; z < 24; ++z)
      for (std::int64_t y = 0; y < 24; ++y)
        for (std::int64_t x = 0; x < 24; ++x) blocks.set(x, y, z, coarse(x / 2, y / 2, z / 2));
    MetricsReport r = evaluate_case(coarse, blocks, blocks.dims(), {1, 1, 1});
    CHECK(r.dsc == 1.0);
    CHECK(r.hd95 == 0.0);
  }
  SUBCASE("one-empty prediction") {
    MetricsReport r = evaluate_case(BinaryMask(gt.dims()), gt, gt.dims(), {1, 1, 1});
    CHECK(r.dsc == 0.0);
    CHECK(std::isnan(r.hd95));
  }
  CHECK_THROWS_AS(evaluate_case(gt, gt, {24, 24, 23}, {1, 1, 1}), ShapeError);
}
