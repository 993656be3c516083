#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "cutlab/kernel.hpp"
#include "cutlab/step_kernel.hpp"

namespace cutlab {

inline constexpr std::size_t kBlowupLimit = 4096;
inline constexpr std::size_t kCommonSizeLimit = 1024;
inline constexpr std::size_t kExactPermLimit = 8;

/// n*t blocks, each value replicated t x t; the same function on [0,1]^2.
StepKernel blowup(const StepKernel& W, std::size_t t);

/// What the annealer minimizes. CutNorm is faithful but costs a cut-norm
/// evaluation per proposal; Frobenius (sum of squared differences) has O(N)
/// swap updates and bounds the spectral certificate used for large N.
enum class AnnealObjective { CutNorm, Frobenius };

struct AnnealConfig {
  double cooling = 0.97;
  int proposals_per_block = 200;
  int sweeps = 20;
  int restarts = 8;
  /// <= 0 selects the median |delta| over 100 random transpositions.
  double initial_temperature = 0.0;
  AnnealObjective objective = AnnealObjective::CutNorm;
  /// Inner cut norm: exact up to this size, heuristic beyond.
  std::size_t exact_objective_limit = 12;
  int heuristic_restarts = 8;
};

enum class DistMethod { ExactPerm, Annealed };
std::string_view to_string(DistMethod m);

/// Estimates of the cut distance between two step kernels over block
/// permutations after blow-up to a common size N.
///
/// `upper` is always a certified value of ||U - W o pi||_box for the returned
/// permutation: the exact cut norm when N <= 30, otherwise
/// min(||.||_1, sigma_max / N), which dominates the cut norm. `estimate` is
/// the cut norm itself at the witness (heuristic lower estimate when N > 30).
struct CutDistanceEstimate {
  double upper = 0.0;
  double lower = 0.0;
  double estimate = 0.0;
  bool estimate_exact = true;
  std::vector<std::size_t> permutation;
  DistMethod method = DistMethod::ExactPerm;
  std::size_t blowup_size = 0;
};

CutDistanceEstimate cut_distance_upper(const StepKernel& U, const StepKernel& W,
                                       const AnnealConfig& cfg = {}, std::uint64_t seed = 0);

/// | ||U||_box - ||W||_box | when both norms are exactly computable, else 0.
double cut_distance_lower(const StepKernel& U, const StepKernel& W);

/// Certified upper bound on ||A||_box: min(L1, largest |eigenvalue| / n).
double cut_norm_certified_upper(const StepKernel& A);

struct Discretization {
  StepKernel kernel;
  double l1_error_bound = 0.0;
};

/// m x m block averages of U and a certified bound on ||U - U_m||_1.
Discretization discretize_kernel(const KernelSpec& U, int m);

}  // namespace cutlab
