#pragma once

// JSON forms of the configuration types. Field names match the struct
// members; unknown keys are rejected so typos do not silently fall back to
// defaults.

#include <json.hpp>

#include "cranaug/geo_aug.hpp"
#include "cranaug/metrics.hpp"
#include "cranaug/registration.hpp"

namespace cranaug {

nlohmann::json to_json(const GeoAugConfig& c);
// Accepts an object with GeoAugConfig fields or a preset name string.
// Missing fields keep their defaults. Throws ValidationError.
GeoAugConfig geo_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RegConfig& c);
RegConfig reg_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MetricsReport& r);

// FNV-1a of the compact dump; used as a config fingerprint in provenance.
std::string config_hash(const nlohmann::json& j);

}  // namespace cranaug
