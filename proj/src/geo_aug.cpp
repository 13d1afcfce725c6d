#include "cranaug/geo_aug.hpp"

#include <cmath>
#include <iostream>

#include "cranaug/volume_ops.hpp"

namespace cranaug {

std::string_view to_string(FlipAxis a) {
  switch (a) {
    case FlipAxis::sagittal: return "sagittal";
    case FlipAxis::frontal: return "frontal";
    case FlipAxis::longitudinal: return "longitudinal";
  }
  return "?";
}

std::optional<FlipAxis> parse_flip_axis(std::string_view s) {
  if (s == "sagittal") return FlipAxis::sagittal;
  if (s == "frontal") return FlipAxis::frontal;
  if (s == "longitudinal") return FlipAxis::longitudinal;
  return std::nullopt;
}

void GeoAugConfig::validate() const {
  if (!(per_transform_probability >= 0.0 && per_transform_probability <= 1.0)) {
    throw ValidationError("per_transform_probability must be in [0, 1]");
  }
  if (!(affine_scale_range.lo > 0.0) || affine_scale_range.lo > affine_scale_range.hi) {
    throw ValidationError("affine_scale_range needs 0 < lo <= hi");
  }
  if (noise_threshold_range.lo > noise_threshold_range.hi) {
    throw ValidationError("noise_threshold_range needs lo <= hi");
  }
  if (affine_max_deg < 0.0 || affine_max_trans < 0.0) {
    throw ValidationError("affine_max_deg and affine_max_trans must be >= 0");
  }
  if (noise_enabled && !(noise_std > 0.0)) throw ValidationError("noise_std must be > 0");
  if (!(crop_max_fraction >= 0.0 && crop_max_fraction < 0.5)) {
    throw ValidationError("crop_max_fraction must be in [0, 0.5)");
  }
}

bool GeoAugConfig::affine_enabled() const {
  return affine_max_deg > 0.0 || affine_max_trans > 0.0 || affine_scale_range != Range{1.0, 1.0};
}

GeoAugConfig preset(Preset p) {
  GeoAugConfig c;
  switch (p) {
    case Preset::basic:
      c.flip_axes = {FlipAxis::sagittal};
      c.crops_enabled = false;
      c.affine_max_deg = 7.0;
      c.affine_max_trans = 7.0;
      c.affine_scale_range = {0.7, 1.1};
      c.noise_enabled = false;
      break;
    case Preset::heavy:
      c.flip_axes = {FlipAxis::sagittal};
      c.crops_enabled = true;
      c.affine_max_deg = 15.0;
      c.affine_max_trans = 10.0;
      c.affine_scale_range = {0.5, 1.2};
      c.noise_enabled = true;
      c.noise_std = 1.0;
      c.noise_threshold_range = {2.2, 4.5};
      break;
    case Preset::extreme:
      c.flip_axes = {FlipAxis::sagittal, FlipAxis::frontal, FlipAxis::longitudinal};
      c.crops_enabled = true;
      c.affine_max_deg = 45.0;
      c.affine_max_trans = 15.0;
      c.affine_scale_range = {0.4, 1.3};
      c.noise_enabled = true;
      c.noise_std = 1.0;
      c.noise_threshold_range = {1.8, 4.5};
      break;
  }
  return c;
}

std::optional<Preset> parse_preset(std::string_view s) {
  if (s == "basic") return Preset::basic;
  if (s == "heavy") return Preset::heavy;
  if (s == "extreme") return Preset::extreme;
  return std::nullopt;
}

std::size_t check_case_pair(const CasePair& pair, std::string_view label) {
  if (!pair.defective_skull.same_geometry(pair.defect)) {
    throw ShapeError("case " + std::string(label) + ": channel geometry differs, skull " +
                     to_string(pair.defective_skull.dims()) + " vs defect " + to_string(pair.defect.dims()));
  }
  std::size_t overlap = overlap_count(pair.defective_skull, pair.defect);
  if (overlap > 0) {
    std::cerr << "warning: case " << label << ": defect overlaps defective skull in " << overlap << " voxels\n";
  }
  return overlap;
}

CasePair flip_pair(const CasePair& pair, FlipAxis axis) {
  int a = static_cast<int>(axis);
  return {flip(pair.defective_skull, a), flip(pair.defect, a)};
}

CasePair crop_slab(const CasePair& pair, int axis, bool from_low, std::int64_t width) {
  CasePair out = pair;
  if (width <= 0) return out;
  const Dims d = pair.defective_skull.dims();
  std::int64_t n = d[axis];
  std::int64_t lo = from_low ? 0 : n - width;
  std::int64_t hi = from_low ? width : n;
  MaskWriter w(out.defective_skull);
  for (std::int64_t z = 0; z < d.z; ++z) {
    for (std::int64_t y = 0; y < d.y; ++y) {
      for (std::int64_t x = 0; x < d.x; ++x) {
        std::int64_t c = axis == 0 ? x : (axis == 1 ? y : z);
        if (c >= lo && c < hi) w.set(out.defective_skull.index(x, y, z), false);
      }
    }
  }
  return out;
}

BinaryMask noise_xor(const BinaryMask& m, double std, double t, std::uint64_t key) {
  BinaryMask out(m.dims(), m.spacing());
  MaskWriter w(out);
  auto src = m.data();
  const auto n = static_cast<std::int64_t>(src.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    auto u = static_cast<std::uint64_t>(i);
    bool noise = std::abs(std * counter_normal(key, u)) > t;
    w.set(static_cast<std::size_t>(i), (src[static_cast<std::size_t>(i)] != 0) != noise);
  }
  return out;
}

CasePair random_flip(const CasePair& pair, const std::vector<FlipAxis>& axes, Rng& rng) {
  CasePair out = pair;
  for (FlipAxis a : axes) {
    if (rng.bernoulli(0.5)) out = flip_pair(out, a);
  }
  return out;
}

CasePair random_crop(const CasePair& pair, const GeoAugConfig& config, Rng& rng) {
  if (!(config.crop_max_fraction < 0.5)) throw ValidationError("crop_max_fraction must be < 0.5");
  int axis = static_cast<int>(rng.below(3));
  bool from_low = rng.bernoulli(0.5);
  std::int64_t n = pair.defective_skull.dims()[axis];
  auto max_width = static_cast<std::int64_t>(std::floor(config.crop_max_fraction * static_cast<double>(n)));
  std::int64_t width = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_width) + 1));
  return crop_slab(pair, axis, from_low, width);
}

AffineTransform random_affine(const GeoAugConfig& config, Rng& rng) {
  AffineTransform t;
  for (int a = 0; a < 3; ++a) t.rotation_deg[a] = rng.uniform(-config.affine_max_deg, config.affine_max_deg);
  for (int a = 0; a < 3; ++a) t.translation[a] = rng.uniform(-config.affine_max_trans, config.affine_max_trans);
  double s = rng.uniform(config.affine_scale_range.lo, config.affine_scale_range.hi);
  t.scale = {s, s, s};
  return t;
}

BinaryMask binary_noise(const BinaryMask& m, double std, Range threshold_range, Rng& rng) {
  if (!(std > 0.0)) throw DomainError("binary noise std must be > 0");
  double t = rng.uniform(threshold_range.lo, threshold_range.hi);
  std::uint64_t key = rng.next_u64();
  return noise_xor(m, std, t, key);
}

CasePair augment(const CasePair& pair, const GeoAugConfig& config, Rng& rng, AugmentLog* log) {
  config.validate();
  std::vector<GeoTransform> order;
  if (!config.flip_axes.empty()) order.push_back(GeoTransform::flip);
  if (config.crops_enabled) order.push_back(GeoTransform::crop);
  if (config.affine_enabled()) order.push_back(GeoTransform::affine);
  if (config.noise_enabled) order.push_back(GeoTransform::noise);
  rng.shuffle(order);

  CasePair out = pair;
  for (GeoTransform t : order) {
    if (!rng.bernoulli(config.per_transform_probability)) continue;
    switch (t) {
      case GeoTransform::flip:
        out = random_flip(out, config.flip_axes, rng);
        break;
      case GeoTransform::crop:
        out = random_crop(out, config, rng);
        break;
      case GeoTransform::affine: {
        AffineTransform a = random_affine(config, rng);
        out = {apply_affine(out.defective_skull, a), apply_affine(out.defect, a)};
        break;
      }
      case GeoTransform::noise:
        out.defective_skull = binary_noise(out.defective_skull, config.noise_std, config.noise_threshold_range, rng);
        break;
    }
    if (log) log->applied.push_back(t);
  }
  return out;
}

}  // namespace cranaug
