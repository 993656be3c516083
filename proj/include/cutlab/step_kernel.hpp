#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cutlab {

/// Symmetric step function on [0,1]^2 over n uniform steps of length 1/n.
/// Block (i,j) carries values()[i*n + j].
class StepKernel {
 public:
  StepKernel() = default;

  /// Throws ParameterError if `values` is not a symmetric n*n array or if
  /// zero_diagonal is set while a diagonal entry is nonzero.
  StepKernel(std::size_t n, std::vector<double> values, bool zero_diagonal = false);

  static StepKernel zeros(std::size_t n, bool zero_diagonal = false);

  std::size_t n() const noexcept { return n_; }
  bool zero_diagonal() const noexcept { return zero_diagonal_; }
  std::span<const double> values() const noexcept { return values_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }

  StepKernel negated() const;
  StepKernel scaled(double factor) const;

  /// Simultaneous row/column relabeling: result(i,j) = (*this)(perm[i], perm[j]).
  StepKernel permuted(std::span<const std::size_t> perm) const;

  double max_abs() const noexcept;
  bool nonnegative() const noexcept;
  bool nonpositive() const noexcept;

  double grand_sum() const noexcept;

  /// L^p norm of the step function (block area 1/n^2).
  double lp_norm(double p) const;
  double l1_norm() const { return lp_norm(1.0); }

  /// Frobenius norm of the value matrix; the step function's L^2 norm is this / n.
  double frobenius() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  bool zero_diagonal_ = false;
};

/// Difference of two kernels on the same grid; zero_diagonal is kept only when
/// both operands carry it.
StepKernel operator-(const StepKernel& a, const StepKernel& b);

}  // namespace cutlab
