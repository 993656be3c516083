#include "cutlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cutlab/errors.hpp"

namespace cutlab {

Interval01 wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  if (successes > n) throw ParameterError("successes exceed trials");
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double centre = (ph + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z / (1.0 + z2 / nn) * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

MeanStats mean_stats(std::span<const double> v) {
  MeanStats m;
  m.n = v.size();
  if (v.empty()) return m;
  m.mean = pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() < 2) return m;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m.mean) * (v[i] - m.mean);
  const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
  m.stderr_ = std::sqrt(var / static_cast<double>(v.size()));
  return m;
}

}  // namespace cutlab
