#include "cutlab/vkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/quadrature.hpp"

namespace cutlab {

VectorStepKernel::VectorStepKernel(std::size_t n, std::size_t d, std::vector<double> values,
                                   bool zero_diagonal)
    : n_(n), d_(d), values_(std::move(values)), zero_diagonal_(zero_diagonal) {
  if (d_ < 1) throw ParameterError("vector kernel needs d >= 1");
  if (values_.size() != n_ * n_ * d_)
    throw ParameterError("vector kernel needs n*n*d values, got " + std::to_string(values_.size()));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i; j < n_; ++j)
      for (std::size_t c = 0; c < d_; ++c) {
        if ((*this)(i, j, c) != (*this)(j, i, c))
          throw ParameterError("vector kernel values are not symmetric");
        if (zero_diagonal_ && i == j && (*this)(i, i, c) != 0.0)
          throw ParameterError("zero_diagonal set with a nonzero diagonal entry");
      }
}

StepKernel VectorStepKernel::component(std::size_t c) const {
  if (c >= d_) throw std::out_of_range("component index outside [d]");
  std::vector<double> v(n_ * n_);
  for (std::size_t b = 0; b < n_ * n_; ++b) v[b] = values_[b * d_ + c];
  return StepKernel(n_, std::move(v), zero_diagonal_);
}

StepKernel VectorStepKernel::l1_block_norms() const {
  std::vector<double> v(n_ * n_, 0.0);
  for (std::size_t b = 0; b < n_ * n_; ++b)
    for (std::size_t c = 0; c < d_; ++c) v[b] += std::abs(values_[b * d_ + c]);
  return StepKernel(n_, std::move(v), zero_diagonal_);
}

VectorStepKernel VectorStepKernel::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return VectorStepKernel(n_, d_, std::move(v), zero_diagonal_);
}

VectorStepKernel stack_components(std::span<const StepKernel> parts) {
  if (parts.empty()) throw ParameterError("need at least one component");
  const std::size_t n = parts[0].n(), d = parts.size();
  bool zd = true;
  for (const StepKernel& p : parts) {
    if (p.n() != n) throw ParameterError("components have different sizes");
    zd = zd && p.zero_diagonal();
  }
  std::vector<double> v(n * n * d);
  for (std::size_t b = 0; b < n * n; ++b)
    for (std::size_t c = 0; c < d; ++c) v[b * d + c] = parts[c].values()[b];
  return VectorStepKernel(n, d, std::move(v), zd);
}

StepKernel scalarize(const VectorStepKernel& W, std::span<const double> f) {
  const std::size_t n = W.n(), d = W.d();
  if (f.size() != d)
    throw ParameterError("functional has dimension " + std::to_string(f.size()) +
                         ", kernel has d = " + std::to_string(d));
  std::vector<double> v(n * n, 0.0);
  const auto vals = W.values();
  for (std::size_t b = 0; b < n * n; ++b)
    for (std::size_t c = 0; c < d; ++c) v[b] += f[c] * vals[b * d + c];
  return StepKernel(n, std::move(v), W.zero_diagonal());
}

VectorCutResult vector_cut_norm_exact(const VectorStepKernel& W) {
  const std::size_t d = W.d();
  if (d > kVectorDimLimit)
    throw SizeError("vector cut norm enumerates 2^(d-1) vertices; d <= 20, got d = " +
                    std::to_string(d));
  if (W.n() > kExactCutLimit)
    throw SizeError("vector cut norm needs exact scalar cut norms, n <= 30");
  VectorCutResult best;
  best.value = -1.0;
  const std::uint64_t patterns = std::uint64_t{1} << (d - 1);
  std::vector<double> f(d);
  for (std::uint64_t s = 0; s < patterns; ++s) {
    f[0] = 1.0;
    for (std::size_t c = 1; c < d; ++c) f[c] = ((s >> (c - 1)) & 1U) ? -1.0 : 1.0;
    CutNormResult r = cut_norm_exact(scalarize(W, f));
    if (r.value > best.value) {
      best.value = r.value;
      best.f = f;
      best.S = std::move(r.S);
      best.T = std::move(r.T);
    }
  }
  return best;
}

EpsilonNet build_epsilon_net(std::size_t d, double epsilon) {
  if (d < 2) throw ParameterError("constraint violated: d >= 2 (got d = " + std::to_string(d) + ")");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ParameterError("constraint violated: 0 < epsilon < 1");
  // Grid on [-1,1] with pitch eps, endpoint 1 always included.
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::floor(2.0 / epsilon + 1e-12));
  for (std::size_t i = 0; i <= steps; ++i) grid.push_back(std::min(1.0, -1.0 + epsilon * i));
  if (grid.back() < 1.0) grid.push_back(1.0);
  const double g = static_cast<double>(grid.size());
  if (2.0 * d * std::pow(g, static_cast<double>(d - 1)) > kNetSizeLimit)
    throw SizeError("epsilon net would exceed 1e7 points");

  EpsilonNet net;
  net.epsilon = epsilon;
  net.d = d;
  net.reference_size =
      2.0 * d / std::pow(epsilon * std::sqrt(static_cast<double>(d)), static_cast<double>(d - 1));
  std::vector<std::size_t> idx(d - 1, 0);
  for (std::size_t face = 0; face < d; ++face)
    for (double sign : {1.0, -1.0}) {
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        std::vector<double> p(d);
        for (std::size_t c = 0, t = 0; c < d; ++c) p[c] = (c == face) ? sign : grid[idx[t++]];
        net.points.push_back(std::move(p));
        std::size_t t = 0;
        while (t < d - 1 && ++idx[t] == grid.size()) idx[t++] = 0;
        if (t == d - 1) break;
      }
    }
  std::sort(net.points.begin(), net.points.end());
  net.points.erase(std::unique(net.points.begin(), net.points.end()), net.points.end());
  return net;
}

double vector_cut_norm_net(const VectorStepKernel& W, const EpsilonNet& net,
                           std::vector<double>* argmax) {
  if (W.n() > kExactCutLimit) throw SizeError("net cut norm needs exact scalar cut norms, n <= 30");
  if (net.d != W.d()) throw ParameterError("net dimension does not match the kernel");
  double best = 0.0;
  const std::vector<double>* arg = nullptr;
  for (const auto& f : net.points) {
    const double v = cut_norm_exact(scalarize(W, f)).value;
    if (v > best || arg == nullptr) {
      best = v;
      arg = &f;
    }
  }
  if (argmax && arg) *argmax = *arg;
  return best;
}

VectorKernelSpec::VectorKernelSpec(std::vector<KernelSpec> components)
    : parts_(std::move(components)) {
  if (parts_.empty()) throw ParameterError("vector kernel needs at least one component");
}

VectorKernelSpec VectorKernelSpec::pow_checker(double alpha, double c1, int m, double c2) {
  if (!(c2 <= c1))
    throw ParameterError("constraint violated: checkerboard level <= power level (got " +
                         std::to_string(c2) + " > " + std::to_string(c1) + ")");
  return VectorKernelSpec({KernelSpec::pow_corner(alpha, c1), KernelSpec::checkerboard(m, c2)});
}

std::vector<double> VectorKernelSpec::eval(double x, double y) const {
  std::vector<double> out;
  out.reserve(parts_.size());
  for (const KernelSpec& U : parts_) out.push_back(cutlab::eval(U, x, y));
  return out;
}

double VectorKernelSpec::l1_norm() const {
  double s = 0.0;
  for (const KernelSpec& U : parts_) s += cutlab::lp_norm(U, 1.0).value;
  return s;
}

double VectorKernelSpec::lp_norm(double p, double rel_tol) const {
  if (!(p >= 1.0)) throw ParameterError("lp_norm needs p >= 1");
  bool singular = false;
  std::vector<double> breaks;
  for (const KernelSpec& U : parts_) {
    // Each component must itself be in L^p.
    (void)cutlab::lp_norm(U, p);
    singular = singular || U.singular();
    if (U.family() == Family::SignedPow) breaks.push_back(0.5);
    if (U.family() == Family::Checkerboard || U.family() == Family::Step)
      for (int i = 1; i < U.m_blocks(); ++i) breaks.push_back(static_cast<double>(i) / U.m_blocks());
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  auto inner = [&](double u) {
    auto h = [&](double v) {
      double s = 0.0;
      for (const KernelSpec& U : parts_) s += std::abs(eval_reflected(U, u, v));
      return std::pow(s, p);
    };
    return quad::integrate_unit(h, singular, rel_tol * 0.1, breaks).value;
  };
  return std::pow(quad::integrate_unit(inner, singular, rel_tol, breaks).value, 1.0 / p);
}

double VectorKernelSpec::cut_norm() const {
  for (std::size_t lead = 0; lead < parts_.size(); ++lead) {
    const KernelSpec& P = parts_[lead];
    if (P.family() != Family::PowCorner || P.c() < 0.0 || P.alpha() < 0.0) continue;
    // P >= c everywhere; dominance makes every vertex scalarization
    // sign-definite, so its cut norm is |integral|.
    double others = 0.0, rest = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < parts_.size() && ok; ++i) {
      if (i == lead) continue;
      if (!parts_[i].bounded()) {
        ok = false;
        break;
      }
      others += parts_[i].sup_norm();
      const KernelSpec& Q = parts_[i];
      double integral = 0.0;
      if (Q.family() == Family::Checkerboard) {
        integral = (Q.m_blocks() % 2 == 0) ? 0.0 : Q.c() / (Q.m_blocks() * double(Q.m_blocks()));
      } else if (Q.family() == Family::Step) {
        for (double v : Q.step_values()) integral += v;
        integral /= Q.m_blocks() * double(Q.m_blocks());
      } else if (Q.family() == Family::PowCorner) {
        integral = cutlab::lp_norm(Q, 1.0).value * (Q.c() < 0 ? -1.0 : 1.0);
      } else {
        ok = false;
      }
      rest += std::abs(integral);
    }
    if (ok && others <= P.c()) return cutlab::lp_norm(P, 1.0).value + rest;
  }
  throw UnsupportedError("no closed-form cut norm for this vector kernel");
}

VectorStepKernel sample_vector_kernel(const VectorKernelSpec& U, const SamplePoints& X) {
  std::vector<StepKernel> parts;
  for (const KernelSpec& C : U.components()) parts.push_back(sample_kernel(C, X));
  return stack_components(parts);
}

VectorSample draw_vector_sample(const VectorKernelSpec& U, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ParameterError("sample size k must be >= 2");
  SamplePoints X = draw_points(k, seed);
  VectorStepKernel W = sample_vector_kernel(U, X);
  return {std::move(X), std::move(W)};
}

VectorBounds vector_theorem_bounds(const VectorNorms& n, const ConcentrationParams& prm,
                                   std::size_t k, std::size_t d) {
  const double p = prm.p, g = prm.gamma, phi = prm.phi;
  auto fail = [](const std::string& what) {
    throw ParameterError("constraint violated: " + what);
  };
  if (k < 2) fail("k >= 2");
  if (d < 2) fail("d >= 2");
  if (!(p > 2.0)) fail("p > 2");
  if (!(g > 1.0 / p)) fail("gamma > 1/p");
  if (!(g < 0.5)) fail("gamma < 1/2");
  if (!(phi > 0.0)) fail("phi > 0");
  const double kd = static_cast<double>(k), dd = static_cast<double>(d), L = std::log(kd);
  VectorBounds b;
  b.epsilon = std::pow(kd, -0.25 + 0.25 / p);
  b.lower_rhs = -(n.cut + std::sqrt(18.0 * (g * p - 1.0)) * (n.l1 + 2.0 * n.lp)) *
                std::pow(kd, -0.5 + g) * std::sqrt(L);
  b.lower_prob = 1.0 - 3.0 * std::pow(kd, 1.0 - g * p);
  const double inner = n.cut + 30.0 * n.lp +
                       6.0 * std::sqrt(phi * p / 2.0) * (n.l1 + 2.0 * n.lp) * std::sqrt(L) /
                           std::pow(kd, (p - 3.0) / (4.0 * p) - phi);
  b.upper_rhs = 10.0 * inner * b.epsilon;
  b.upper_prob = 1.0 - 6.0 * std::pow(dd, (3.0 - dd) / 2.0) *
                           std::pow(kd, -phi * p + (dd - 1.0) * (p - 1.0) / 4.0);
  return b;
}

}  // namespace cutlab
