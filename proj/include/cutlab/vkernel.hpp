#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cutlab/concentration.hpp"
#include "cutlab/kernel.hpp"
#include "cutlab/step_kernel.hpp"

namespace cutlab {

/// Symmetric step function on [0,1]^2 with values in (R^d, l1). Block (i,j)
/// carries values()[(i*n + j)*d + c] for c < d.
class VectorStepKernel {
 public:
  VectorStepKernel() = default;
  VectorStepKernel(std::size_t n, std::size_t d, std::vector<double> values,
                   bool zero_diagonal = false);

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  bool zero_diagonal() const noexcept { return zero_diagonal_; }
  std::span<const double> values() const noexcept { return values_; }

  double operator()(std::size_t i, std::size_t j, std::size_t c) const noexcept {
    return values_[(i * n_ + j) * d_ + c];
  }

  StepKernel component(std::size_t c) const;
  /// Block values ||W(i,j)||_1.
  StepKernel l1_block_norms() const;
  /// (int ||W(x,y)||_1^p)^(1/p).
  double lp_norm(double p) const { return l1_block_norms().lp_norm(p); }
  VectorStepKernel scaled(double factor) const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> values_;
  bool zero_diagonal_ = false;
};

/// Components stacked into one vector kernel; all must share n.
VectorStepKernel stack_components(std::span<const StepKernel> parts);

/// Blockwise <f, W(i,j)>.
StepKernel scalarize(const VectorStepKernel& W, std::span<const double> f);

struct VectorCutResult {
  double value = 0.0;
  std::vector<double> f;
  std::vector<std::size_t> S;
  std::vector<std::size_t> T;
};

inline constexpr std::size_t kVectorDimLimit = 20;

/// sup over ||f||_inf = 1 of ||<f,W>||_box. The map f -> ||<f,W>||_box is a
/// maximum of |linear functionals| of f, hence convex, so the sup over the
/// l_inf ball is attained at a vertex f in {-1,1}^d. Antipodal vertices give
/// the same value, so 2^(d-1) sign patterns (first coordinate +1) suffice.
VectorCutResult vector_cut_norm_exact(const VectorStepKernel& W);

struct EpsilonNet {
  double epsilon = 0.0;
  std::size_t d = 0;
  std::vector<std::vector<double>> points;
  /// 2d / (eps sqrt d)^(d-1), reported for comparison only.
  double reference_size = 0.0;
};

inline constexpr double kNetSizeLimit = 1e7;

/// For each of the 2d faces of the l_inf unit sphere, a grid of pitch eps on
/// the free coordinates (endpoints included); duplicates on shared edges are
/// removed. Every unit vector lies within eps/2 of the net in l_inf.
EpsilonNet build_epsilon_net(std::size_t d, double epsilon);

/// max over the net of exact scalar cut norms; the witness point is returned
/// through `argmax` when given.
double vector_cut_norm_net(const VectorStepKernel& W, const EpsilonNet& net,
                           std::vector<double>* argmax = nullptr);

/// A vector kernel whose components are scalar catalog kernels.
class VectorKernelSpec {
 public:
  explicit VectorKernelSpec(std::vector<KernelSpec> components);
  /// (pow_corner(alpha, c1), checkerboard(m, c2)); requires c2 <= c1 so that
  /// every scalarization is sign-definite.
  static VectorKernelSpec pow_checker(double alpha, double c1, int m, double c2);

  std::size_t d() const noexcept { return parts_.size(); }
  const std::vector<KernelSpec>& components() const noexcept { return parts_; }

  std::vector<double> eval(double x, double y) const;

  /// sum of the components' L^1 norms (pointwise l1 norm integrated).
  double l1_norm() const;
  /// (int (sum_c |U_c|)^p)^(1/p) by nested quadrature.
  double lp_norm(double p, double rel_tol = 1e-10) const;
  /// ||U||_box in closed form when one component is a nonnegative power
  /// kernel dominating the sum of the others' sup norms, so every
  /// <f,U> with f a vertex is sign-definite; UnsupportedError otherwise.
  double cut_norm() const;

 private:
  std::vector<KernelSpec> parts_;
};

VectorStepKernel sample_vector_kernel(const VectorKernelSpec& U, const SamplePoints& X);

struct VectorSample {
  SamplePoints points;
  VectorStepKernel kernel;
};

/// Uses the same points as draw_sample(component, k, seed).
VectorSample draw_vector_sample(const VectorKernelSpec& U, std::size_t k, std::uint64_t seed);

struct VectorNorms {
  double l1 = 0.0;
  double lp = 0.0;
  double cut = 0.0;
};

struct VectorBounds {
  double lower_rhs = 0.0;
  double upper_rhs = 0.0;
  double lower_prob = 0.0;
  double upper_prob = 0.0;
  double epsilon = 0.0;  // k^(-1/4 + 1/(4p)), the net pitch in the upper bound
};

/// Lower: -(||U|| + sqrt(18(gamma p - 1))(||U||_1 + 2||U||_p)) k^(-1/2+gamma) sqrt(ln k),
/// probability 1 - 3k^(1 - gamma p).
/// Upper: 10 [||U|| + 30||U||_p + 6 sqrt(phi p/2)(||U||_1 + 2||U||_p) sqrt(ln k) /
/// k^((p-3)/(4p) - phi)] k^(-1/4 + 1/(4p)), probability
/// 1 - 6 d^((3-d)/2) k^(-phi p + (d-1)(p-1)/4).
VectorBounds vector_theorem_bounds(const VectorNorms& norms, const ConcentrationParams& params,
                                   std::size_t k, std::size_t d);

}  // namespace cutlab
