#pragma once

// Online geometric augmentation of (defective skull, defect) pairs: random
// flips, crops, affine transforms and binary noise, each applied with a fixed
// probability in a freshly shuffled order.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cranaug/affine.hpp"
#include "cranaug/rng.hpp"
#include "cranaug/volume.hpp"

namespace cranaug {

// sagittal flips x, frontal flips y, longitudinal flips z.
enum class FlipAxis { sagittal = 0, frontal = 1, longitudinal = 2 };

std::string_view to_string(FlipAxis a);
std::optional<FlipAxis> parse_flip_axis(std::string_view s);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

struct GeoAugConfig {
  std::vector<FlipAxis> flip_axes;
  bool crops_enabled = false;
  double affine_max_deg = 0.0;
  double affine_max_trans = 0.0;
  Range affine_scale_range{1.0, 1.0};
  bool noise_enabled = false;
  double noise_std = 1.0;
  Range noise_threshold_range{0.0, 0.0};
  double per_transform_probability = 0.75;
  double crop_max_fraction = 0.1;

  // Throws ValidationError.
  void validate() const;
  bool affine_enabled() const;
  bool operator==(const GeoAugConfig&) const = default;
};

enum class Preset { basic, heavy, extreme };

GeoAugConfig preset(Preset p);
std::optional<Preset> parse_preset(std::string_view s);

struct CasePair {
  BinaryMask defective_skull;
  BinaryMask defect;
};

// Checks matching geometry (ShapeError) and warns on stderr when the channels
// overlap. Returns the number of overlapping voxels.
std::size_t check_case_pair(const CasePair& pair, std::string_view label = {});

// Deterministic building blocks.
CasePair flip_pair(const CasePair& pair, FlipAxis axis);
// Zeroes `width` voxels of the defective-skull channel along `axis`, from the
// low side when from_low is true.
CasePair crop_slab(const CasePair& pair, int axis, bool from_low, std::int64_t width);
// flip mask m wherever |std * g| > t, g drawn from the counter stream `key`
BinaryMask noise_xor(const BinaryMask& m, double std, double t, std::uint64_t key);

// Random operations.
CasePair random_flip(const CasePair& pair, const std::vector<FlipAxis>& axes, Rng& rng);
CasePair random_crop(const CasePair& pair, const GeoAugConfig& config, Rng& rng);
AffineTransform random_affine(const GeoAugConfig& config, Rng& rng);
BinaryMask binary_noise(const BinaryMask& m, double std, Range threshold_range, Rng& rng);

enum class GeoTransform { flip, crop, affine, noise };

// Which transforms fired during one augment call, in application order.
struct AugmentLog {
  std::vector<GeoTransform> applied;
};

CasePair augment(const CasePair& pair, const GeoAugConfig& config, Rng& rng,
                 AugmentLog* log = nullptr);

}  // namespace cranaug
