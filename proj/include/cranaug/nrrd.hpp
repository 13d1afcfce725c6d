#pragma once

// NRRD subset: 3-D scalar volumes, uint8 / int16 / float32, raw or gzip
// encoding, little-endian, attached data. Plus the flat "VXF1" dump used for
// intermediate pipeline stages.

#include <filesystem>
#include <string>

#include "cranaug/volume.hpp"

namespace cranaug {

enum class ScalarType { uint8, int16, float32 };
enum class NrrdEncoding { raw, gzip };

std::string to_string(ScalarType t);

struct NrrdHeader {
  Dims sizes{};
  Spacing spacing{1.0, 1.0, 1.0};
  ScalarType type = ScalarType::uint8;
  NrrdEncoding encoding = NrrdEncoding::raw;
};

struct NrrdVolume {
  NrrdHeader header;
  Volume3 volume;
};

// Errors: FormatError naming the offending header field, IoError for
// unreadable or truncated files.
NrrdVolume read_nrrd(const std::filesystem::path& path);
Volume3 load_nrrd(const std::filesystem::path& path);
// Loads and checks every voxel is 0 or 1.
BinaryMask load_nrrd_mask(const std::filesystem::path& path);

// Values must be exactly representable in the chosen type (FormatError
// otherwise). The file is written to a temporary sibling and renamed.
void save_nrrd(const Volume3& v, const std::filesystem::path& path,
               ScalarType type = ScalarType::float32, NrrdEncoding encoding = NrrdEncoding::raw);
void save_nrrd(const BinaryMask& m, const std::filesystem::path& path,
               NrrdEncoding encoding = NrrdEncoding::raw);

// VXF1: magic "VXF1", 3 x u32 dims, 3 x f32 spacing, float32 payload, all
// little-endian.
void save_vxf(const Volume3& v, const std::filesystem::path& path);
Volume3 load_vxf(const std::filesystem::path& path);

// Writes bytes to path via temp file + rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace cranaug
