#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cranaug/config_json.hpp"
#include "cranaug/geo_aug.hpp"
#include "cranaug/metrics.hpp"
#include "cranaug/phantoms.hpp"
#include "cranaug/stats.hpp"
#include "cranaug/volume_ops.hpp"
#include "support.hpp"

using namespace cranaug;

namespace {

CasePair small_case(std::uint64_t seed) { return phantoms::skull_case({32, 32, 32}, seed); }

GeoAugConfig flips_only(std::vector<FlipAxis> axes, double p) {
  GeoAugConfig c;
  c.flip_axes = std::move(axes);
  c.per_transform_probability = p;
  return c;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("presets") {
  GeoAugConfig b = preset(Preset::basic);
  CHECK(b.flip_axes == std::vector<FlipAxis>{FlipAxis::sagittal});
  CHECK_FALSE(b.crops_enabled);
  CHECK(b.affine_max_deg == 7.0);
  CHECK(b.affine_max_trans == 7.0);
  CHECK(b.affine_scale_range == Range{0.7, 1.1});
  CHECK_FALSE(b.noise_enabled);
  CHECK(b.per_transform_probability == 0.75);

  GeoAugConfig h = preset(Preset::heavy);
  CHECK(h.flip_axes == std::vector<FlipAxis>{FlipAxis::sagittal});
  CHECK(h.crops_enabled);
  CHECK(h.affine_max_deg == 15.0);
  CHECK(h.affine_max_trans == 10.0);
  CHECK(h.affine_scale_range == Range{0.5, 1.2});
  CHECK(h.noise_enabled);
  CHECK(h.noise_std == 1.0);
  CHECK(h.noise_threshold_range == Range{2.2, 4.5});

  GeoAugConfig e = preset(Preset::extreme);
  CHECK(e.flip_axes == std::vector<FlipAxis>{FlipAxis::sagittal, FlipAxis::frontal, FlipAxis::longitudinal});
  CHECK(e.crops_enabled);
  CHECK(e.affine_max_deg == 45.0);
  CHECK(e.affine_max_trans == 15.0);
  CHECK(e.affine_scale_range == Range{0.4, 1.3});
  CHECK(e.noise_enabled);
  CHECK(e.noise_std == 1.0);
  CHECK(e.noise_threshold_range == Range{1.8, 4.5});

  CHECK(parse_preset("heavy") == Preset::heavy);
  CHECK_FALSE(parse_preset("medium").has_value());
}

TEST_CASE("config validation and json") {
  GeoAugConfig c;
  c.per_transform_probability = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.affine_scale_range = {0.0, 1.0};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.noise_threshold_range = {3, 2};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.crop_max_fraction = 0.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);

  for (Preset p : {Preset::basic, Preset::heavy, Preset::extreme}) {
    CHECK(geo_config_from_json(to_json(preset(p))) == preset(p));
  }
  CHECK(geo_config_from_json(nlohmann::json("extreme")) == preset(Preset::extreme));
  CHECK_THROWS_AS(geo_config_from_json(nlohmann::json{{"flip_axis", {"sagittal"}}}), ValidationError);
  CHECK_THROWS_AS(geo_config_from_json(nlohmann::json{{"flip_axes", {"diagonal"}}}), ValidationError);
  CHECK_THROWS_AS(geo_config_from_json(nlohmann::json{{"affine_max_deg", "ten"}}), ValidationError);
}

TEST_CASE("case pair checks") {
  CasePair bad{BinaryMask({4, 4, 4}), BinaryMask({4, 4, 5})};
  CHECK_THROWS_AS(check_case_pair(bad), ShapeError);
  CasePair overlap{BinaryMask({4, 4, 4}), BinaryMask({4, 4, 4})};
  overlap.defective_skull.set(1, 1, 1, true);
  overlap.defect.set(1, 1, 1, true);
  CHECK(check_case_pair(overlap, "overlap fixture") == 1);
  CHECK(check_case_pair(small_case(1)) == 0);
}

TEST_CASE("flips") {
  CasePair p = small_case(2);
  for (FlipAxis a : {FlipAxis::sagittal, FlipAxis::frontal, FlipAxis::longitudinal}) {
    CasePair twice = flip_pair(flip_pair(p, a), a);
    CHECK(twice.defective_skull == p.defective_skull);
    CHECK(twice.defect == p.defect);
    CHECK(flip_pair(p, a).defect.count() == p.defect.count());
  }
  BinaryMask sym = phantoms::solid_ellipsoid({15, 9, 9}, {7, 4, 4}, {6, 3, 3});
  CasePair s{sym, BinaryMask(sym.dims())};
  CHECK(flip_pair(s, FlipAxis::sagittal).defective_skull == sym);

  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    CasePair r = random_flip(p, {FlipAxis::sagittal, FlipAxis::frontal}, rng);
    CHECK(r.defective_skull.count() == p.defective_skull.count());
    CHECK(r.defect.count() == p.defect.count());
  }
}

TEST_CASE("crops") {
  CasePair p = small_case(4);
  GeoAugConfig c = preset(Preset::heavy);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    CasePair r = random_crop(p, c, rng);
    CHECK(subset(r.defective_skull, p.defective_skull));
    CHECK(r.defect == p.defect);
  }
  c.crop_max_fraction = 0.0;
  for (int i = 0; i < 5; ++i) CHECK(random_crop(p, c, rng).defective_skull == p.defective_skull);
  CasePair slab = crop_slab(p, 2, true, 32);
  CHECK(slab.defective_skull.count() == 0);
}

TEST_CASE("random affine parameters") {
  GeoAugConfig zero;
  Rng rng(1);
  CHECK(random_affine(zero, rng).is_identity());

  GeoAugConfig e = preset(Preset::extreme);
  Rng a(9), b(9);
  for (int i = 0; i < 10000; ++i) {
    AffineTransform t = random_affine(e, a);
    AffineTransform u = random_affine(e, b);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(t.rotation_deg[k]) <= 45.0);
      CHECK(std::abs(t.translation[k]) <= 15.0);
      CHECK(t.rotation_deg[k] == u.rotation_deg[k]);
    }
    CHECK(t.scale.x >= 0.4);
    CHECK(t.scale.x <= 1.3);
    CHECK(t.scale.x == t.scale.z);
  }
}

TEST_CASE("binary noise") {
  SUBCASE("threshold far in the tail flips nothing") {
    BinaryMask m({100, 100, 100});
    Rng rng(1);
    BinaryMask r = binary_noise(m, 1.0, {50, 50}, rng);
    CHECK(r.count() == 0);
  }
  SUBCASE("flip fraction follows the normal tail") {
    BinaryMask m({256, 256, 256});
    Rng rng(2);
    BinaryMask r = binary_noise(m, 1.0, {2.2, 2.2}, rng);
    double expected = 2.0 * normal_cdf(-2.2);
    double measured = static_cast<double>(r.count()) / static_cast<double>(r.size());
    CHECK(expected == doctest::Approx(0.0278).epsilon(0.01));
    CHECK(measured == doctest::Approx(expected).epsilon(0.10));
  }
  SUBCASE("xor on a non-empty mask stays binary and symmetric") {
    BinaryMask m = testing::random_mask({20, 20, 20}, 3, 0.5);
    BinaryMask a = noise_xor(m, 1.0, 1.0, 77);
    BinaryMask b = noise_xor(a, 1.0, 1.0, 77);
    CHECK(b == m);
  }
  Rng rng(0);
  CHECK_THROWS_AS(binary_noise(BinaryMask({2, 2, 2}), 0.0, {1, 2}, rng), DomainError);
}

TEST_CASE("augment") {
  CasePair p = small_case(6);
  SUBCASE("p = 0 is the identity") {
    GeoAugConfig c = preset(Preset::extreme);
    c.per_transform_probability = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      Rng rng(s);
      AugmentLog log;
      CasePair r = augment(p, c, rng, &log);
      CHECK(r.defective_skull == p.defective_skull);
      CHECK(r.defect == p.defect);
      CHECK(log.applied.empty());
    }
  }
  SUBCASE("flip-only runs keep channels consistent") {
    GeoAugConfig c = flips_only({FlipAxis::sagittal}, 1.0);
    bool saw_flip = false;
    for (std::uint64_t s = 0; s < 16; ++s) {
      Rng rng(s);
      CasePair r = augment(p, c, rng);
      bool flipped = r.defective_skull != p.defective_skull;
      saw_flip = saw_flip || flipped;
      BinaryMask expected = flipped ? flip(p.defect, 0) : p.defect;
      CHECK(dsc(r.defect, expected) == 1.0);
    }
    CHECK(saw_flip);
  }
  SUBCASE("affine-only runs match the transform applied to each channel") {
    GeoAugConfig c;
    c.affine_max_deg = 10;
    c.affine_max_trans = 3;
    c.affine_scale_range = {0.9, 1.1};
    c.per_transform_probability = 1.0;
    Rng rng(11), replay(11);
    CasePair r = augment(p, c, rng);
    std::vector<GeoTransform> order{GeoTransform::affine};
    replay.shuffle(order);
    (void)replay.bernoulli(1.0);
    AffineTransform t = random_affine(c, replay);
    CHECK(r.defect == apply_affine(p.defect, t));
    CHECK(r.defective_skull == apply_affine(p.defective_skull, t));
  }
  SUBCASE("same seed, same output") {
    for (Preset pr : {Preset::basic, Preset::heavy, Preset::extreme}) {
      Rng a(21), b(21);
      CasePair x = augment(p, preset(pr), a);
      CasePair y = augment(p, preset(pr), b);
      CHECK(x.defective_skull == y.defective_skull);
      CHECK(x.defect == y.defect);
    }
  }
  SUBCASE("outputs stay binary and keep dims") {
    Rng rng(8);
    for (int i = 0; i < 5; ++i) {
      CasePair r = augment(p, preset(Preset::extreme), rng);
      CHECK(r.defective_skull.dims() == p.defective_skull.dims());
      for (auto v : r.defective_skull.data()) CHECK(v <= 1);
    }
  }
  SUBCASE("basic preset keeps volume within the scale bounds") {
    BinaryMask blob = phantoms::smooth_blob({64, 64, 64}, 5, 18);
    CasePair b{blob, BinaryMask(blob.dims())};
    const double n0 = static_cast<double>(blob.count());
    for (std::uint64_t s = 0; s < 8; ++s) {
      Rng rng(s);
      double n = static_cast<double>(augment(b, preset(Preset::basic), rng).defective_skull.count());
      CHECK(n >= 0.7 * 0.7 * 0.7 * n0 * 0.95);
      CHECK(n <= 1.1 * 1.1 * 1.1 * n0 * 1.05);
    }
  }
}
