#pragma once

#include <cstddef>
#include <span>

namespace cranaug {

// Exact null distribution up to this many non-zero differences.
inline constexpr std::size_t kWilcoxonExactLimit = 25;
inline constexpr std::size_t kWilcoxonMinPairs = 6;

struct ComparisonResult {
  double statistic = 0.0;  // W+, rank sum of positive differences x - y
  double w_minus = 0.0;
  double p_value = 1.0;    // two-sided
  std::size_t n_effective = 0;
  bool exact = false;

  // +1 when x tends to exceed y, -1 when y exceeds x, 0 when balanced.
  int direction() const { return statistic > w_minus ? 1 : (statistic < w_minus ? -1 : 0); }
};

// Paired two-sided Wilcoxon signed-rank test. Zero differences are dropped,
// tied magnitudes get average ranks. Exact p-value (enumerating the sign
// distribution of the actual ranks) for n <= 25, otherwise the normal
// approximation with tie and continuity correction.
// Throws ValidationError on length mismatch, InsufficientDataError when fewer
// than 6 non-zero differences remain.
ComparisonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace cranaug
