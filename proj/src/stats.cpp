#include "cranaug/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cranaug/error.hpp"

namespace cranaug {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

ComparisonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("wilcoxon: sample lengths differ (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  std::vector<double> diff;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - y[i];
    if (std::isnan(d)) throw ValidationError("wilcoxon: NaN score at index " + std::to_string(i));
    if (d != 0.0) diff.push_back(d);
  }
  const std::size_t n = diff.size();
  if (n < kWilcoxonMinPairs) {
    throw InsufficientDataError("wilcoxon: " + std::to_string(n) + " non-zero differences, need at least " +
                                std::to_string(kWilcoxonMinPairs));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(diff[a]) < std::abs(diff[b]); });

  // Average ranks, stored doubled so ties stay integral.
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diff[order[j + 1]]) == std::abs(diff[order[i]])) ++j;
    long r2 = static_cast<long>(i + 1 + j + 1);  // 2 * mean of ranks i+1 .. j+1
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  long wplus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diff[i] > 0) wplus2 += rank2[i];
  }

  ComparisonResult r;
  r.n_effective = n;
  r.statistic = static_cast<double>(wplus2) / 2.0;
  r.w_minus = static_cast<double>(total2 - wplus2) / 2.0;

  if (n <= kWilcoxonExactLimit) {
    // Distribution of the doubled W+ over all 2^n sign patterns.
    std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (long s = reach; s >= 0; --s) {
        double w = ways[static_cast<std::size_t>(s)];
        if (w != 0.0) ways[static_cast<std::size_t>(s + rank2[i])] += w;
      }
      reach += rank2[i];
    }
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total2; ++s) {
      double w = ways[static_cast<std::size_t>(s)];
      if (s <= wplus2) lower += w;
      if (s >= wplus2) upper += w;
    }
    double all = std::ldexp(1.0, static_cast<int>(n));
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    r.exact = true;
    return r;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  double dev = std::max(0.0, std::abs(r.statistic - mean) - 0.5);
  double z = var > 0.0 ? dev / std::sqrt(var) : 0.0;
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  r.exact = false;
  return r;
}

}  // namespace cranaug
