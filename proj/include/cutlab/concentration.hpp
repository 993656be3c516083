#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cutlab/kernel.hpp"
#include "cutlab/step_kernel.hpp"

namespace cutlab {

struct ConcentrationParams {
  double p = 3.0;
  double nu = 2.0;
  double gamma = 0.45;
  double phi = 0.2;
  double lambda = 1.0;
  int q = 2;
};

/// Norms that enter the bound expressions. Entries that are not available
/// for a kernel are NaN; expressions that need them throw.
struct KernelNorms {
  double p = 0.0;
  double l1 = 0.0;
  double lp = 0.0;
  double l2 = 0.0;
  double cut = 0.0;
  double cut_plus = 0.0;
  double sup = 0.0;
};

KernelNorms kernel_norms(const KernelSpec& U, double p);

struct DeltaReport {
  double delta_value = 0.0;
  std::vector<double> per_j_section;  // |U_{X_j} - ||U||_1|
  std::vector<double> per_j_average;  // |row mean of |U| - ||U||_1|
  bool in_L0 = false;
};

/// Delta_U(X) and membership of X in L0_{nu,gamma}: Delta_U(X) <= nu k^gamma ||U||_1.
DeltaReport delta_U(const KernelSpec& U, const SamplePoints& X, double nu, double gamma);

/// 1 - 2k 2^p ||U||_p^p / (nu^p k^(gamma p) ||U||_1^p), raw (may be negative).
double l0_probability_bound(const KernelSpec& U, double p, double nu, double gamma, std::size_t k);

/// min{1, 2^p E|Z|^p / delta^p}.
double chebyshev_bound(double moment_p, double delta, double p);

/// X with coordinate a (0-based) replaced by x0.
SamplePoints replace_coordinate(const SamplePoints& X, std::size_t a, double x0);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

/// |k^2 ||U_X||* - k^2 ||U_Y||*| <= 2 sum_{j != a} |U(x0, X_j)| + 2 sum_{j != a} |U(X_a, X_j)|
/// with * the two-sided norm or (one_sided) the one-sided norm; exact norms.
InequalityCheck replacement_inequality_check(const KernelSpec& U, const SamplePoints& X,
                                             std::size_t a, double x0, bool one_sided);

/// (6/k) ||U||_1 (1 + nu k^gamma).
double azuma_alpha(const KernelSpec& U, std::size_t k, double nu, double gamma);

struct TailBound {
  double threshold = 0.0;
  double prob = 0.0;
};

/// P(| ||U_X|| - E||U_X|| | >= lambda alpha sqrt(k)) <= 2 e^{-2 lambda^2} + 2k min{1, ...}.
TailBound dispersion_tail_bound(const KernelSpec& U, const ConcentrationParams& params,
                                std::size_t k);

using IndexSet = std::vector<std::size_t>;

/// R1+ = columns j with W(R1, {j}) > 0; R2+ = rows i with W({i}, R2) > 0.
std::pair<IndexSet, IndexSet> rplus_sets(const StepKernel& W, const IndexSet& R1,
                                         const IndexSet& R2);

struct SubsampleCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
  bool exact = true;
  double stderr_ = 0.0;  // Monte Carlo standard error of the expectation term
};

inline constexpr double kExactSubsetBudget = 1e6;

/// W(R1,R2) <= E_Q[ W((Q cap R2)+, R2) ] + k ||W||_F / sqrt(q), where ||W||_F
/// is the Frobenius norm of the value matrix (k^2 ||U_X||_2 = k ||W||_F).
/// Exact over all q-subsets when C(k,q) <= 1e6, else 1e4 random subsets.
SubsampleCheck bs12_check(const StepKernel& W, const IndexSet& R1, const IndexSet& R2,
                          std::size_t q, std::uint64_t seed = 0);

/// ||W||+ <= (1/k^2) E_{Q1,Q2}[ max_{R_i in Q_i} W(R2+, R1+) ] + (2/sqrt q) ||W||_F / k,
/// exactly enumerated; requires k <= 14 and C(k,q)^2 <= 1e6.
SubsampleCheck bplus_upper_check(const StepKernel& W, std::size_t q);

struct FrobeniusCheck {
  double empirical_mean_sq = 0.0;
  double target = 0.0;
  double stderr_ = 0.0;
  double z_score = 0.0;
};

/// Monte Carlo estimate of E ||U_X||_2^2 against ((k-1)/k) ||U||_2^2.
FrobeniusCheck frobenius_check(const KernelSpec& U, std::size_t k, int trials, std::uint64_t seed);

enum class BoundId {
  FirstUpper,          // first sampling lemma, upper deviation
  FirstLower,          // first sampling lemma, lower deviation
  FirstUpperNu,        // same with a free nu
  FirstLowerNu,
  SecondLemma,         // cut distance, reconstructed explicit constant
  SecondLemmaBounded,  // bounded-kernel cut distance bound
  SystematicLower,     // E||U_X|| - ||U|| >= -||U||/k
  SystematicUpper,     // E||U_X|| - ||U|| <= 30 ||U||_p k^(-1/4 + 1/(4p))
  MaxExpect,           // q-subsample expectation of the restricted maximum
  QSampleUpper,        // systematic error through q-subsamples, optimized q
};

std::string_view to_string(BoundId id);
BoundId bound_from_string(std::string_view s);

struct BoundValue {
  double value = 0.0;
  /// Probability with which the bound holds (raw, may be < 0); NaN when the
  /// statement is deterministic.
  double probability = 0.0;
  /// Alternative reading of the probability where the source states two.
  double probability_alt = 0.0;
  std::vector<std::pair<std::string, double>> terms;
};

BoundValue theorem_bound(BoundId id, const KernelNorms& norms, const ConcentrationParams& params,
                         std::size_t k);
BoundValue theorem_bound(BoundId id, const KernelSpec& U, const ConcentrationParams& params,
                         std::size_t k);

/// The four-term chain bounding the cut distance of a k-sample with the
/// threshold f(k) = 3 ||U||_p (ln k)^(1/(2p)). Terms in order: truncation
/// (twice), first-lemma leading term, dispersion term, bounded second lemma.
std::vector<std::pair<std::string, double>> second_lemma_chain(const KernelNorms& norms,
                                                               double p, double phi, double k);

/// sup over k >= 2 of chain(k) / ((||U||_1 + ||U||_p) (ln k)^(-1/2 + 1/(2p))).
double second_lemma_constant(const KernelNorms& norms, double p, double phi);

}  // namespace cutlab
