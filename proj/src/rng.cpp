#include "cranaug/rng.hpp"

#include <cmath>
#include <numbers>

namespace cranaug {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  return mix64(state);
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ (index + 0x632BE59BD9B4E019ULL) * 0x9E3779B97F4A7C15ULL);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Box-Muller on (u1, u2) with u1 moved into (0, 1].
inline double box_muller(double u1, double u2, double* spare) {
  double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  double theta = 2.0 * std::numbers::pi * u2;
  if (spare) *spare = r * std::sin(theta);
  return r * std::cos(theta);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return to_unit(next_u64()); }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection on the top of the range keeps it unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  has_spare_ = true;
  return box_muller(u1, u2, &spare_);
}

double counter_uniform(std::uint64_t key, std::uint64_t index) {
  return to_unit(mix64(mix64(key) + index * 0x9E3779B97F4A7C15ULL));
}

double counter_normal(std::uint64_t key, std::uint64_t index) {
  std::uint64_t base = mix64(key) + 2 * index * 0x9E3779B97F4A7C15ULL;
  double u1 = to_unit(mix64(base));
  double u2 = to_unit(mix64(base + 0x9E3779B97F4A7C15ULL));
  return box_muller(u1, u2, nullptr);
}

}  // namespace cranaug
