#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cutlab/step_kernel.hpp"

namespace cutlab {

enum class CutAlgorithm { Exact, Heuristic, Oracle, NonnegClosedForm };
std::string_view to_string(CutAlgorithm a);

/// value = |W(S,T)| / n^2 (or W(S,T) / n^2 when one_sided). Witnesses are
/// sorted index lists.
struct CutNormResult {
  double value = 0.0;
  std::vector<std::size_t> S;
  std::vector<std::size_t> T;
  CutAlgorithm method = CutAlgorithm::Exact;
  bool one_sided = false;
};

inline constexpr std::size_t kExactCutLimit = 30;
inline constexpr std::size_t kOracleCutLimit = 14;

/// (1/n^2) max_{S,T} W(S,T) by Gray-code enumeration of S with the optimal
/// T = {j : column sum > 0}. O(2^n n).
CutNormResult cut_norm_plus_exact(const StepKernel& W);

/// max of the one-sided norms of W and -W; both come out of one enumeration.
CutNormResult cut_norm_exact(const StepKernel& W);

/// Direct enumeration of all 4^n pairs. Test oracle.
CutNormResult matrix_cut_norm_oracle(const StepKernel& W);

/// Alternating maximization from S = [n], S = {argmax |row sum|} and
/// `restarts` random subsets, on W and on -W. Always a lower bound.
CutNormResult cut_norm_heuristic(const StepKernel& W, int restarts, std::uint64_t seed);

/// Closed form for sign-definite W, exact enumeration up to kExactCutLimit,
/// heuristic beyond.
CutNormResult cut_norm_auto(const StepKernel& W, int restarts = 16, std::uint64_t seed = 0);

/// Unnormalized rectangle sum W(S,T) = sum_{i in S, j in T} W_ij.
double rectangle_sum(const StepKernel& W, std::span<const std::size_t> S,
                     std::span<const std::size_t> T);

struct Interval {
  double lo;
  double hi;
};

/// Sorted, merged copy of an interval union; rejects reversed or out-of-range
/// endpoints.
std::vector<Interval> normalize_intervals(std::span<const Interval> u);

/// int_{S x T} W for finite interval unions S, T in [0,1].
double step_restriction_value(const StepKernel& W, std::span<const Interval> S,
                              std::span<const Interval> T);

}  // namespace cutlab
