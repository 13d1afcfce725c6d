#include "cranaug/config_json.hpp"

#include <cstdio>
#include <set>

namespace cranaug {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValidationError(std::string(what) + ": unknown field '" + key + "'");
  }
}

Range range_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(std::string(field) + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

json to_json(const GeoAugConfig& c) {
  json axes = json::array();
  for (FlipAxis a : c.flip_axes) axes.push_back(std::string(to_string(a)));
  return {{"flip_axes", axes},
          {"crops_enabled", c.crops_enabled},
          {"affine_max_deg", c.affine_max_deg},
          {"affine_max_trans", c.affine_max_trans},
          {"affine_scale_range", {c.affine_scale_range.lo, c.affine_scale_range.hi}},
          {"noise_enabled", c.noise_enabled},
          {"noise_std", c.noise_std},
          {"noise_threshold_range", {c.noise_threshold_range.lo, c.noise_threshold_range.hi}},
          {"per_transform_probability", c.per_transform_probability},
          {"crop_max_fraction", c.crop_max_fraction}};
}

GeoAugConfig geo_config_from_json(const json& j) {
  try {
    if (j.is_string()) {
      auto p = parse_preset(j.get<std::string>());
      if (!p) throw ValidationError("unknown geometric preset '" + j.get<std::string>() + "'");
      return preset(*p);
    }
    if (!j.is_object()) throw ValidationError("geometric config must be an object or preset name");
    reject_unknown(j,
                   {"flip_axes", "crops_enabled", "affine_max_deg", "affine_max_trans", "affine_scale_range",
                    "noise_enabled", "noise_std", "noise_threshold_range", "per_transform_probability",
                    "crop_max_fraction"},
                   "geometric config");
    GeoAugConfig c;
    if (auto it = j.find("flip_axes"); it != j.end()) {
      for (const auto& a : *it) {
        auto axis = parse_flip_axis(a.get<std::string>());
        if (!axis) throw ValidationError("unknown flip axis '" + a.get<std::string>() + "'");
        c.flip_axes.push_back(*axis);
      }
    }
    read_if(j, "crops_enabled", c.crops_enabled);
    read_if(j, "affine_max_deg", c.affine_max_deg);
    read_if(j, "affine_max_trans", c.affine_max_trans);
    if (j.contains("affine_scale_range")) c.affine_scale_range = range_from_json(j["affine_scale_range"], "affine_scale_range");
    read_if(j, "noise_enabled", c.noise_enabled);
    read_if(j, "noise_std", c.noise_std);
    if (j.contains("noise_threshold_range")) {
      c.noise_threshold_range = range_from_json(j["noise_threshold_range"], "noise_threshold_range");
    }
    read_if(j, "per_transform_probability", c.per_transform_probability);
    read_if(j, "crop_max_fraction", c.crop_max_fraction);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("geometric config: ") + e.what());
  }
}

json to_json(const RegConfig& c) {
  return {{"levels", c.levels},
          {"iterations_per_level", c.iterations_per_level},
          {"step_size", c.step_size},
          {"alpha", c.alpha},
          {"reference_size", c.reference_size}};
}

RegConfig reg_config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ValidationError("registration config must be an object");
    reject_unknown(j, {"levels", "iterations_per_level", "step_size", "alpha", "reference_size"},
                   "registration config");
    RegConfig c;
    read_if(j, "levels", c.levels);
    read_if(j, "iterations_per_level", c.iterations_per_level);
    read_if(j, "step_size", c.step_size);
    read_if(j, "alpha", c.alpha);
    read_if(j, "reference_size", c.reference_size);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("registration config: ") + e.what());
  }
}

json to_json(const MetricsReport& r) {
  auto num = [](double v) -> json { return std::isnan(v) ? json(nullptr) : json(v); };
  return {{"dsc", num(r.dsc)}, {"sdsc", num(r.sdsc)}, {"hd95", num(r.hd95)}, {"msd", num(r.msd)}, {"bdsc", num(r.bdsc)}};
}

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cranaug
