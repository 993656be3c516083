#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cutlab/step_kernel.hpp"

namespace cutlab {

enum class Family { PowCorner, SignedPow, Checkerboard, Step, Truncated };

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

/// A catalog kernel on [0,1]^2.
///
///   pow_corner   c * ((1-x)(1-y))^-alpha
///   signed_pow   c * s(x) s(y) ((1-x)(1-y))^-alpha,  s = +1 on [0,1/2), -1 on [1/2,1]
///   checkerboard c * (-1)^(i+j) on an m x m grid
///   step         arbitrary symmetric m x m block values
///   truncated    clamp(source, -threshold, +threshold)
///
/// The catalog is deliberately small: every family has closed-form L^p norms,
/// section integrals and cut norms, so reference values never depend on
/// quadrature. Values are immutable once built.
class KernelSpec {
 public:
  static KernelSpec pow_corner(double alpha, double c = 1.0);
  static KernelSpec signed_pow(double alpha, double c = 1.0);
  static KernelSpec checkerboard(int m, double c = 1.0);
  static KernelSpec step(int m, std::vector<double> values);
  static KernelSpec constant(double c) { return step(1, {c}); }
  static KernelSpec truncated(const KernelSpec& source, double threshold);

  Family family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double c() const noexcept { return c_; }
  int m_blocks() const noexcept { return m_; }
  const std::vector<double>& step_values() const noexcept { return values_; }
  double threshold() const noexcept { return threshold_; }
  const KernelSpec& source() const;

  /// pow_corner / signed_pow with alpha > 0 (also through truncation's source
  /// only for evaluation purposes; truncated kernels themselves are bounded).
  bool singular() const noexcept;
  bool bounded() const noexcept { return !singular(); }
  bool nonnegative() const noexcept;
  /// ess sup |U|; throws IntegrabilityError for singular families.
  double sup_norm() const;

 private:
  KernelSpec() = default;
  Family family_ = Family::Step;
  double alpha_ = 0.0;
  double c_ = 1.0;
  int m_ = 1;
  std::vector<double> values_;
  double threshold_ = 0.0;
  std::shared_ptr<const KernelSpec> source_;
};

/// Factor form U(x,y) = c * phi(x) phi(y) (off the diagonal) for the power
/// families; used for O(k) sample statistics.
struct ProductForm {
  double c;
  double alpha;
  bool signed_factor;
  double factor(double x) const;
  double abs_factor(double x) const;
};
std::optional<ProductForm> product_form(const KernelSpec& U);

/// U(x,y). Domain [0,1]^2; the singular edges x = 1 or y = 1 are rejected for
/// singular families.
double eval(const KernelSpec& U, double x, double y);

/// U(1-u, 1-v) computed from the distances u, v to the singular corner without
/// cancellation. Used by the quadrature routes.
double eval_reflected(const KernelSpec& U, double u, double v);

enum class NormMethod { Analytic, Quadrature, ExactStep };
std::string_view to_string(NormMethod m);

struct NormValue {
  double value;
  NormMethod method;
};

/// ||U||_p. Closed form for every catalog family; throws IntegrabilityError
/// when alpha * p >= 1 for an unbounded family.
NormValue lp_norm(const KernelSpec& U, double p);

/// ||U||_p by nested corner-aware adaptive quadrature (independent route).
double lp_norm_quadrature(const KernelSpec& U, double p, double rel_tol = 1e-10);

/// U_x = int_0^1 |U(x,z)| dz.
double section_integral(const KernelSpec& U, double x);
double section_integral_quadrature(const KernelSpec& U, double x, double rel_tol = 1e-10);

enum class CutMethod { Analytic, AnalyticRank1, ExactStep };
std::string_view to_string(CutMethod m);

struct CutReference {
  double value;
  CutMethod method;
};

/// ||U||_box for catalog kernels.
CutReference cut_norm_reference(const KernelSpec& U);

/// One-sided ||U||^+_box where available (nonnegative families and step
/// families); throws UnsupportedError otherwise.
double cut_norm_plus_reference(const KernelSpec& U);

/// Block values of step-like kernels (checkerboard, step, truncated step-like).
StepKernel as_step_kernel(const KernelSpec& U);

struct SamplePoints {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<double> coords;
};

/// k i.i.d. uniform points reproducible from seed.
SamplePoints draw_points(std::size_t k, std::uint64_t seed);

/// The k-sample: values U(X_i, X_j) off the diagonal and literal zeros on it.
StepKernel sample_kernel(const KernelSpec& U, const SamplePoints& X);

struct Sample {
  SamplePoints points;
  StepKernel kernel;
};
Sample draw_sample(const KernelSpec& U, std::size_t k, std::uint64_t seed);

/// Sum over i != j of U(X_i,X_j); O(k) for the power families.
double sample_offdiag_sum(const KernelSpec& U, const SamplePoints& X);
/// Sum over i != j of U(X_i,X_j)^2.
double sample_offdiag_sq_sum(const KernelSpec& U, const SamplePoints& X);
/// r_j = sum_{i != j} |U(X_i, X_j)|.
std::vector<double> sample_abs_row_sums(const KernelSpec& U, const SamplePoints& X);

}  // namespace cutlab
