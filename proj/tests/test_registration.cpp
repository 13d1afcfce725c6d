#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cranaug/config_json.hpp"
#include "cranaug/metrics.hpp"
#include "cranaug/parallel.hpp"
#include "cranaug/phantoms.hpp"
#include "cranaug/reference.hpp"
#include "cranaug/registration.hpp"
#include "cranaug/volume_ops.hpp"
#include "support.hpp"

using namespace cranaug;

namespace {

Volume3 random_volume(const Dims& d, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Volume3 v(d, {1, 1, 1}, 0.0);
  for (double& x : v.data()) x = u(gen);
  return v;
}

// Integer part in [-1, 1], fractional part kept away from cell faces so the
// trilinear interpolant is smooth around every sample point.
DisplacementField random_field(const Dims& d, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> whole(-1, 1);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  DisplacementField u(d);
  for (Vec3& v : u.data())
    for (int c = 0; c < 3; ++c) v[c] = whole(gen) + frac(gen);
  return u;
}

double max_abs_diff(const Volume3& a, const Volume3& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

RegConfig quick_config() {
  RegConfig c;
  c.levels = 2;
  c.iterations_per_level = 20;
  return c;
}

}  // namespace

TEST_CASE("warp") {
  BinaryMask m = testing::random_boxes({20, 16, 16}, 1, 3);
  Volume3 v = m.to_volume();
  SUBCASE("zero field is the identity") { CHECK(warp(v, DisplacementField(v.dims())) == v); }
  SUBCASE("constant field shifts by the opposite vector") {
    BinaryMask inner(m.dims());
    for (std::int64_t z = 0; z < 16; ++z)
      for (std::int64_t y = 0; y < 16; ++y)
        for (std::int64_t x = 0; x < 16; ++x) inner.set(x, y, z, m(x, y, z));
    DisplacementField u(m.dims());
    for (Vec3& w : u.data()) w = {-3, 0, 0};
    CHECK(binarize(warp(inner.to_volume(), u)) == translate(inner, {3, 0, 0}));
  }
  SUBCASE("dims mismatch") { CHECK_THROWS_AS(warp(v, DisplacementField({4, 4, 4})), ShapeError); }
}

TEST_CASE("mse and diffusive_reg") {
  Volume3 ones({4, 4, 4}, {1, 1, 1}, 1.0), zeros({4, 4, 4}, {1, 1, 1}, 0.0);
  CHECK(mse(ones, ones) == 0.0);
  CHECK(mse(ones, zeros) == 1.0);
  Volume3 one_off = zeros;
  one_off(1, 2, 3) = 1.0;
  CHECK(mse(one_off, zeros) == 1.0 / 64.0);
  CHECK_THROWS_AS(mse(ones, Volume3({4, 4, 5}, {1, 1, 1}, 0.0)), ShapeError);

  DisplacementField zero({6, 6, 6});
  CHECK(diffusive_reg(zero) == 0.0);
  DisplacementField constant({6, 6, 6});
  for (Vec3& w : constant.data()) w = {0.3, -2, 5};
  CHECK(diffusive_reg(constant) == 0.0);

  // u_x = x on 8^3: 7 unit forward differences per row, 64 rows.
  DisplacementField ramp({8, 8, 8});
  for (std::int64_t z = 0; z < 8; ++z)
    for (std::int64_t y = 0; y < 8; ++y)
      for (std::int64_t x = 0; x < 8; ++x) ramp(x, y, z).x = double(x);
  double direct = 0.0;
  for (std::int64_t z = 0; z < 8; ++z)
    for (std::int64_t y = 0; y < 8; ++y)
      for (std::int64_t x = 0; x + 1 < 8; ++x) {
        double dd = ramp(x + 1, y, z).x - ramp(x, y, z).x;
        direct += dd * dd;
      }
  direct /= 3.0 * 512.0;
  CHECK(diffusive_reg(ramp) == doctest::Approx(direct).epsilon(1e-15));
  CHECK(direct == doctest::Approx(7.0 / 24.0));
}

TEST_CASE("objective terms") {
  std::mt19937_64 gen(3);
  Volume3 m = random_volume({6, 6, 6}, gen), f = random_volume({6, 6, 6}, gen);
  DisplacementField u = random_field({6, 6, 6}, gen);
  CHECK(objective(m, m, DisplacementField(m.dims()), 5.0).total == 0.0);
  ObjectiveTerms t0 = objective(m, f, u, 0.0);
  CHECK(t0.total == t0.mse);
  ObjectiveTerms t = objective(m, f, u, 123.0);
  CHECK(t.total == t.mse + 123.0 * t.reg);
}

TEST_CASE("objective gradient") {
  std::mt19937_64 gen(4);
  const Dims d{8, 8, 8};
  SUBCASE("zero at the trivial minimum") {
    Volume3 m = random_volume(d, gen);
    DisplacementField g = objective_gradient(m, m, DisplacementField(d), 10.0);
    for (const Vec3& v : g.data()) CHECK(v == Vec3{});
  }
  SUBCASE("matches central finite differences") {
    for (int trial = 0; trial < 5; ++trial) {
      Volume3 m = random_volume(d, gen), f = random_volume(d, gen);
      DisplacementField u = random_field(d, gen);
      const double alpha = trial == 0 ? 0.0 : 0.5 * trial;
      DisplacementField g = objective_gradient(m, f, u, alpha);
      double worst = 0.0;
      for (std::size_t i = 0; i < u.size(); i += 7) {
        for (int c = 0; c < 3; ++c) {
          const double h = 1e-3;
          DisplacementField up = u, dn = u;
          up[i][c] += h;
          dn[i][c] -= h;
          double fd = (objective(m, f, up, alpha).total - objective(m, f, dn, alpha).total) / (2 * h);
          double err = std::abs(g[i][c] - fd) / std::max(std::abs(fd), 1e-9);
          worst = std::max(worst, err);
        }
      }
      CHECK(worst < 1e-3);
    }
  }
  SUBCASE("alpha does not matter on a constant field") {
    Volume3 m = random_volume(d, gen), f = random_volume(d, gen);
    DisplacementField u(d);
    for (Vec3& v : u.data()) v = {0.25, -0.5, 0.75};
    CHECK(objective_gradient(m, f, u, 0.0) == objective_gradient(m, f, u, 1000.0));
  }
}

TEST_CASE("jacobian determinant") {
  const Dims d{10, 10, 10};
  Volume3 j0 = jacobian_determinant(DisplacementField(d));
  for (double v : j0.data()) CHECK(v == 1.0);
  CHECK(folding_fraction(DisplacementField(d)) == 0.0);

  DisplacementField dil(d), shift(d);
  const double c = 4.5;
  for (std::int64_t z = 0; z < 10; ++z)
    for (std::int64_t y = 0; y < 10; ++y)
      for (std::int64_t x = 0; x < 10; ++x) {
        dil(x, y, z) = {0.1 * (x - c), 0.1 * (y - c), 0.1 * (z - c)};
        shift(x, y, z) = {2.5, -1, 0.5};
      }
  Volume3 jd = jacobian_determinant(dil);
  for (std::int64_t z = 0; z < 10; ++z)
    for (std::int64_t y = 0; y < 10; ++y)
      for (std::int64_t x = 0; x < 10; ++x) CHECK(jd(x, y, z) == doctest::Approx(1.331).epsilon(1e-12));
  Volume3 js = jacobian_determinant(shift);
  for (double v : js.data()) CHECK(v == 1.0);

  DisplacementField fold(d);
  for (std::int64_t z = 0; z < 10; ++z)
    for (std::int64_t y = 0; y < 10; ++y)
      for (std::int64_t x = 0; x < 10; ++x) fold(x, y, z).x = -2.0 * x;
  CHECK(folding_fraction(fold) == 1.0);
}

TEST_CASE("pyramid helpers") {
  CHECK(downsampled_dims({64, 63, 1}) == Dims{32, 32, 1});
  DisplacementField u({8, 8, 8});
  for (Vec3& v : u.data()) v = {1, 2, 3};
  DisplacementField up = resample_field(u, {16, 16, 16});
  for (const Vec3& v : up.data()) CHECK(v == Vec3{2, 4, 6});
  DisplacementField down = resample_field(u, {4, 4, 4});
  for (const Vec3& v : down.data()) CHECK(v == Vec3{0.5, 1, 1.5});
}

TEST_CASE("register") {
  auto fixture = phantoms::shell_fixture(32);
  SUBCASE("identical inputs stay put") {
    RegResult r = register_masks(fixture.sphere, fixture.sphere, quick_config());
    CHECK(r.field.mean_magnitude() < 0.1);
    CHECK(dsc(r.warped, fixture.sphere) >= 0.999);
  }
  SUBCASE("trace invariants") {
    RegConfig c = quick_config();
    RegResult r = register_masks(fixture.sphere, fixture.ellipsoid, c);
    CHECK(r.objective_trace.size() == std::size_t(c.levels * (c.iterations_per_level + 1)));
    for (std::size_t i = 0; i < r.objective_trace.size(); ++i) {
      const TraceEntry& e = r.objective_trace[i];
      CHECK(e.total == e.mse + c.alpha * e.reg);
      if (i > 0 && r.objective_trace[i - 1].level == e.level) CHECK(e.total <= r.objective_trace[i - 1].total);
    }
    CHECK(r.field.all_finite());
    CHECK(r.field.dims() == fixture.sphere.dims());
    CHECK(dsc(r.warped, fixture.ellipsoid) > dsc(fixture.sphere, fixture.ellipsoid));
    std::string csv = trace_to_csv(r.objective_trace);
    CHECK(csv.rfind("level,iteration,mse,reg,total\n", 0) == 0);
  }
  SUBCASE("deterministic at any thread count") {
    parallel::set_threads(1);
    RegResult a = register_masks(fixture.sphere, fixture.ellipsoid, quick_config());
    parallel::set_threads(4);
    RegResult b = register_masks(fixture.sphere, fixture.ellipsoid, quick_config());
    parallel::set_threads(parallel::max_threads());
    CHECK(a.field == b.field);
    CHECK(a.warped == b.warped);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(register_masks(fixture.sphere, BinaryMask({32, 32, 31}), quick_config()), ShapeError);
    RegConfig wild = quick_config();
    wild.alpha = 1e7;
    wild.step_size = 10.0;
    wild.iterations_per_level = 200;
    try {
      register_masks(fixture.sphere, fixture.ellipsoid, wild);
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      CHECK(std::string(e.what()).find("iteration") != std::string::npos);
    }
  }
}

TEST_CASE("reg config") {
  RegConfig c;
  CHECK(c.alpha == kDefaultAlpha);
  CHECK(c.alpha_voxel() == doctest::Approx(12500.0 * 4.0 / 65536.0));
  c.levels = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.step_size = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.alpha = -1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  RegConfig d;
  d.alpha = 50000;
  d.iterations_per_level = 7;
  CHECK(reg_config_from_json(to_json(d)) == d);
  CHECK_THROWS_AS(reg_config_from_json(nlohmann::json{{"smoothing", 2}}), ValidationError);
}

TEST_CASE("synthesize_pair") {
  CasePair source = phantoms::skull_case({32, 32, 32}, 1);
  CasePair target = phantoms::skull_case({32, 32, 32}, 2);
  SUBCASE("source onto itself") {
    CasePair out = synthesize_pair(source, source, quick_config());
    CHECK(dsc(out.defective_skull, source.defective_skull) >= 0.999);
    CHECK(dsc(out.defect, source.defect) >= 0.999);
  }
  SUBCASE("moves toward the target, channels stay separated") {
    RegResult r;
    CasePair out = synthesize_pair(source, target, RegConfig{}, &r);
    CHECK(dsc(out.defective_skull, target.defective_skull) > dsc(source.defective_skull, target.defective_skull));
    CHECK(double(overlap_count(out.defect, out.defective_skull)) < 0.01 * double(out.defect.count()));
    CHECK(out.defect == warp_mask(source.defect, r.field));
  }
  SUBCASE("grids must match") {
    CasePair other = phantoms::skull_case({32, 32, 30}, 2);
    CHECK_THROWS_AS(synthesize_pair(source, other, quick_config()), ShapeError);
  }
}

TEST_CASE("parallel kernels agree with the serial reference") {
  parallel::set_threads(4);
  std::mt19937_64 gen(8);
  const Dims d{13, 11, 9};
  Volume3 m = random_volume(d, gen), f = random_volume(d, gen);
  DisplacementField u = random_field(d, gen);
  CHECK(warp(m, u) == reference::warp(m, u));
  CHECK(mse(m, f) == doctest::Approx(reference::mse(m, f)).epsilon(1e-13));
  CHECK(diffusive_reg(u) == doctest::Approx(reference::diffusive_reg(u)).epsilon(1e-13));
  CHECK(max_abs_diff(jacobian_determinant(u), reference::jacobian_determinant(u)) < 1e-12);
  DisplacementField g = objective_gradient(m, f, u, 3.0);
  DisplacementField r = reference::objective_gradient(m, f, u, 3.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int c = 0; c < 3; ++c) CHECK(g[i][c] == doctest::Approx(r[i][c]).epsilon(1e-12));
  parallel::set_threads(parallel::max_threads());
}
