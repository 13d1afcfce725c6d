#include "cranaug/volume.hpp"

#include <omp.h>

#include <cmath>

#include "cranaug/parallel.hpp"

namespace cranaug {

std::string to_string(const Dims& d) {
  return "(" + std::to_string(d.x) + ", " + std::to_string(d.y) + ", " + std::to_string(d.z) + ")";
}

void validate_geometry(const Dims& dims, const Spacing& spacing) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
    throw ShapeError("grid dims must be >= 1, got " + to_string(dims));
  }
  for (int a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw ShapeError("grid spacing must be positive and finite");
    }
  }
}

BinaryMask::BinaryMask(Dims dims, Spacing spacing, std::vector<std::uint8_t> values)
    : grid_(dims, spacing, std::move(values)) {
  for (auto v : grid_.data()) {
    if (v > 1) throw DomainError("binary mask value " + std::to_string(v) + " is not 0 or 1");
  }
}

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (auto v : grid_.data()) n += v;
  return n;
}

Volume3 BinaryMask::to_volume() const {
  Volume3 v(dims(), spacing(), 0.0);
  auto src = grid_.data();
  auto dst = v.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
  return v;
}

std::size_t overlap_count(const BinaryMask& a, const BinaryMask& b) {
  if (a.dims() != b.dims()) {
    throw ShapeError("overlap of masks with dims " + to_string(a.dims()) + " and " + to_string(b.dims()));
  }
  auto da = a.data();
  auto db = b.data();
  std::size_t n = 0;
  for (std::size_t i = 0; i < da.size(); ++i) n += da[i] & db[i];
  return n;
}

namespace parallel {

int max_threads() { return omp_get_max_threads(); }
void set_threads(int n) { omp_set_num_threads(n < 1 ? 1 : n); }

}  // namespace parallel

}  // namespace cranaug
