#pragma once

#include <cstddef>
#include <span>

namespace cutlab {

struct Interval01 {
  double lo;
  double hi;
};

/// Wilson score interval for a binomial proportion.
Interval01 wilson_interval(std::size_t successes, std::size_t n, double z = 1.96);

struct MeanStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error with pairwise summation in index order, so the
/// result does not depend on how the values were produced.
MeanStats mean_stats(std::span<const double> v);

double pairwise_sum(std::span<const double> v);

}  // namespace cutlab
