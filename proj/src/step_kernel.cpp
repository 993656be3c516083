#include "cutlab/step_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cutlab/errors.hpp"

namespace cutlab {

StepKernel::StepKernel(std::size_t n, std::vector<double> values, bool zero_diagonal)
    : n_(n), values_(std::move(values)), zero_diagonal_(zero_diagonal) {
  if (n_ == 0) throw ParameterError("step kernel needs n >= 1");
  if (values_.size() != n_ * n_)
    throw ParameterError("step kernel expects " + std::to_string(n_ * n_) + " values, got " +
                         std::to_string(values_.size()));
  for (std::size_t i = 0; i < n_; ++i) {
    if (zero_diagonal_ && values_[i * n_ + i] != 0.0)
      throw ParameterError("zero_diagonal set but diagonal entry " + std::to_string(i) +
                           " is nonzero");
    for (std::size_t j = i + 1; j < n_; ++j)
      if (values_[i * n_ + j] != values_[j * n_ + i])
        throw ParameterError("step kernel is not symmetric at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
  }
}

StepKernel StepKernel::zeros(std::size_t n, bool zero_diagonal) {
  return StepKernel(n, std::vector<double>(n * n, 0.0), zero_diagonal);
}

StepKernel StepKernel::negated() const { return scaled(-1.0); }

StepKernel StepKernel::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  StepKernel out;
  out.n_ = n_;
  out.values_ = std::move(v);
  out.zero_diagonal_ = zero_diagonal_;
  return out;
}

StepKernel StepKernel::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw ParameterError("permutation length differs from n");
  std::vector<bool> seen(n_, false);
  for (std::size_t p : perm) {
    if (p >= n_ || seen[p]) throw ParameterError("not a permutation of [n]");
    seen[p] = true;
  }
  StepKernel out;
  out.n_ = n_;
  out.zero_diagonal_ = zero_diagonal_;
  out.values_.resize(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out.values_[i * n_ + j] = (*this)(perm[i], perm[j]);
  return out;
}

double StepKernel::max_abs() const noexcept {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

bool StepKernel::nonnegative() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x >= 0.0; });
}

bool StepKernel::nonpositive() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x <= 0.0; });
}

double StepKernel::grand_sum() const noexcept {
  double s = 0.0;
  for (double x : values_) s += x;
  return s;
}

double StepKernel::lp_norm(double p) const {
  if (!(p >= 1.0)) throw ParameterError("lp_norm needs p >= 1");
  double acc = 0.0;
  for (double x : values_) acc += std::pow(std::abs(x), p);
  return std::pow(acc / static_cast<double>(n_ * n_), 1.0 / p);
}

double StepKernel::frobenius() const noexcept {
  double acc = 0.0;
  for (double x : values_) acc += x * x;
  return std::sqrt(acc);
}

StepKernel operator-(const StepKernel& a, const StepKernel& b) {
  if (a.n() != b.n()) throw ParameterError("step kernels differ in size");
  std::vector<double> v(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b.values()[i];
  return StepKernel(a.n(), std::move(v), a.zero_diagonal() && b.zero_diagonal());
}

}  // namespace cutlab
