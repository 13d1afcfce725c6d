#pragma once

// Portable random streams. std:: distributions are implementation-defined,
// so every draw here goes through xoshiro256** seeded by splitmix64 and
// hand-written transforms. Same seed, same stream, on every platform.

#include <array>
#include <cstdint>
#include <vector>

namespace cranaug {

std::uint64_t splitmix64(std::uint64_t& state);

// Stateless 64-bit mix (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

// Seed for sample `index` of a run seeded with `master`.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n); n >= 1.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  // Standard normal via Box-Muller (pairs cached).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Counter-based draws: value depends only on (key, index), so voxel fields can
// be filled in parallel without sharing a stream.
double counter_uniform(std::uint64_t key, std::uint64_t index);
double counter_normal(std::uint64_t key, std::uint64_t index);

}  // namespace cranaug
