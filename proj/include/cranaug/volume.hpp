#pragma once

// Dense voxel grids. Storage is row-major with x fastest:
//   index(x, y, z) = x + nx * (y + ny * z)
// Every coordinate in this library is written (x, y, z) in that order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cranaug/error.hpp"

namespace cranaug {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  bool operator==(const Vec3&) const = default;
};

// Voxel spacing in mm.
using Spacing = Vec3;

struct Dims {
  std::int64_t x = 1;
  std::int64_t y = 1;
  std::int64_t z = 1;

  std::int64_t operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  std::int64_t& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  std::size_t count() const { return static_cast<std::size_t>(x * y * z); }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

// Integer voxel shift, used to record and undo centering.
struct Translation {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  Translation inverse() const { return {-x, -y, -z}; }
  bool operator==(const Translation&) const = default;
};

void validate_geometry(const Dims& dims, const Spacing& spacing);

template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(Dims dims, Spacing spacing, T fill = T{})
      : dims_(dims), spacing_(spacing) {
    validate_geometry(dims_, spacing_);
    data_.assign(dims_.count(), fill);
  }
  Grid(Dims dims, Spacing spacing, std::vector<T> data)
      : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    validate_geometry(dims_, spacing_);
    if (data_.size() != dims_.count()) {
      throw ShapeError("grid data length " + std::to_string(data_.size()) +
                       " does not match dims " + to_string(dims_));
    }
  }

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>(x + dims_.x * (y + dims_.y * z));
  }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims_.x && y < dims_.y && z < dims_.z;
  }

  T operator()(std::int64_t x, std::int64_t y, std::int64_t z) const { return data_[index(x, y, z)]; }
  T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) { return data_[index(x, y, z)]; }
  T operator[](std::size_t i) const { return data_[i]; }
  T& operator[](std::size_t i) { return data_[i]; }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  bool same_geometry(const Grid& other) const {
    return dims_ == other.dims_ && spacing_ == other.spacing_;
  }

  bool operator==(const Grid&) const = default;

 private:
  Dims dims_{};
  Spacing spacing_{1.0, 1.0, 1.0};
  std::vector<T> data_ = std::vector<T>(1, T{});
};

using Volume3 = Grid<double>;

// A grid whose voxels are exactly 0 or 1. Writes go through set() so the
// invariant cannot be broken from outside.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(Dims dims, Spacing spacing = {1.0, 1.0, 1.0}) : grid_(dims, spacing, 0) {}
  // Throws DomainError if any value is not 0 or 1.
  BinaryMask(Dims dims, Spacing spacing, std::vector<std::uint8_t> values);

  const Dims& dims() const { return grid_.dims(); }
  const Spacing& spacing() const { return grid_.spacing(); }
  std::size_t size() const { return grid_.size(); }
  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const { return grid_.index(x, y, z); }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const { return grid_.contains(x, y, z); }

  bool operator()(std::int64_t x, std::int64_t y, std::int64_t z) const { return grid_(x, y, z) != 0; }
  bool operator[](std::size_t i) const { return grid_[i] != 0; }
  void set(std::int64_t x, std::int64_t y, std::int64_t z, bool on) { grid_(x, y, z) = on ? 1 : 0; }
  void set(std::size_t i, bool on) { grid_[i] = on ? 1 : 0; }

  std::span<const std::uint8_t> data() const { return grid_.data(); }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  Volume3 to_volume() const;

  bool same_geometry(const BinaryMask& other) const { return grid_.same_geometry(other.grid_); }
  bool operator==(const BinaryMask&) const = default;

 private:
  // Raw access for kernels in this library that produce masks in bulk.
  friend class MaskWriter;
  Grid<std::uint8_t> grid_;
};

// Bulk writer used by parallel kernels; only ever stores 0 or 1.
class MaskWriter {
 public:
  explicit MaskWriter(BinaryMask& m) : data_(m.grid_.data()) {}
  void set(std::size_t i, bool on) const { data_[i] = on ? 1 : 0; }

 private:
  std::span<std::uint8_t> data_;
};

// Intersection count of two masks with equal dims.
std::size_t overlap_count(const BinaryMask& a, const BinaryMask& b);

}  // namespace cranaug
