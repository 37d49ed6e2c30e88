#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace jdts {

// Pairwise summation: O(log n) error growth and a fixed association order,
// so results do not depend on accumulation scheduling.
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // population variance of the sample
};

inline MeanVar pairwise_mean_var(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  MeanVar mv;
  if (xs.empty()) return mv;
  mv.mean = pairwise_sum(xs) / n;
  double shift_sq = 0.0;
  {
    // second pass over centered values keeps cancellation in check
    std::vector<double> c(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = xs[i] - mv.mean;
      c[i] = d * d;
    }
    shift_sq = pairwise_sum(c);
  }
  mv.variance = shift_sq / n;
  return mv;
}

}  // namespace jdts
