#include "cutlab/truncate.hpp"

#include <cmath>
#include <vector>

#include "cutlab/errors.hpp"
#include "cutlab/quadrature.hpp"

namespace cutlab {
namespace {

void check_k(std::size_t k, double p) {
  if (k < 2) throw ParameterError("threshold needs k >= 2");
  if (!(p > 1.0)) throw ParameterError("threshold needs p > 1");
}

bool power_family(const KernelSpec& U) {
  return U.family() == Family::PowCorner || U.family() == Family::SignedPow;
}

// Both integrals reduce to sums over blocks for step-like kernels.
template <typename F>
double block_integral(const KernelSpec& U, F term) {
  const StepKernel S = as_step_kernel(U);
  double s = 0.0;
  for (double v : S.values()) s += term(std::abs(v));
  return s / static_cast<double>(S.n() * S.n());
}

// Over the corner region {w < t}, where w = (1-x)(1-y) has density -ln w:
//   measure        = t - t ln t
//   int c w^-alpha = c t^b (1/b^2 - ln t / b),  b = 1 - alpha
struct Level {
  double t, measure, mass;
};

Level corner_level(const KernelSpec& U, double f) {
  const double a = U.alpha(), c = U.c(), b = 1.0 - a;
  const double t = std::pow(c / f, 1.0 / a);
  const double lt = std::log(t);
  return {t, t - t * lt, c * std::pow(t, b) * (1.0 / (b * b) - lt / b)};
}

std::vector<double> kink_points(const KernelSpec& U, double u, double f) {
  std::vector<double> pts;
  if (U.family() == Family::SignedPow) pts.push_back(0.5);
  if (power_family(U) && U.alpha() > 0.0) {
    const double t = std::pow(U.c() / f, 1.0 / U.alpha());
    if (t / u < 1.0) pts.push_back(t / u);
  }
  if (U.family() == Family::Checkerboard || U.family() == Family::Step)
    for (int i = 1; i < U.m_blocks(); ++i) pts.push_back(static_cast<double>(i) / U.m_blocks());
  return pts;
}

template <typename G>
double integrate_over_square(const KernelSpec& U, double f, double rel_tol, G integrand) {
  const bool singular = U.singular();
  std::vector<double> outer;
  if (U.family() == Family::SignedPow) outer.push_back(0.5);
  if (power_family(U) && U.alpha() > 0.0) {
    const double t = std::pow(U.c() / f, 1.0 / U.alpha());
    if (t < 1.0) outer.push_back(t);
  }
  if (U.family() == Family::Checkerboard || U.family() == Family::Step)
    for (int i = 1; i < U.m_blocks(); ++i) outer.push_back(static_cast<double>(i) / U.m_blocks());
  auto inner = [&](double u) {
    const std::vector<double> pts = kink_points(U, u, f);
    auto h = [&](double v) { return integrand(std::abs(eval_reflected(U, u, v))); };
    return quad::integrate_unit(h, singular, rel_tol * 0.1, pts).value;
  };
  return quad::integrate_unit(inner, singular, rel_tol, outer).value;
}

}  // namespace

KernelSpec truncate_kernel(const KernelSpec& U, double f) { return KernelSpec::truncated(U, f); }

double first_lemma_threshold(const KernelSpec& U, double p, std::size_t k) {
  check_k(k, p);
  return 3.0 * lp_norm(U, p).value * std::pow(static_cast<double>(k), 1.0 / (4.0 * p));
}

double second_lemma_threshold(const KernelSpec& U, double p, std::size_t k) {
  check_k(k, p);
  return 3.0 * lp_norm(U, p).value * std::pow(std::log(static_cast<double>(k)), 1.0 / (2.0 * p));
}

double truncation_l1_error_bound(const KernelSpec& U, double p, double f) {
  const double l1 = lp_norm(U, 1.0).value;
  if (!(f > l1))
    throw ParameterError("truncation bound needs f > ||U||_1 (f = " + std::to_string(f) +
                         ", ||U||_1 = " + std::to_string(l1) + ")");
  const double np = lp_norm(U, p).value;
  return std::pow(2.0, p) * std::pow(np, p) * f / std::pow(f - l1, p);
}

double truncation_l1_error_exact(const KernelSpec& U, double f) {
  if (!(f > 0.0)) throw ParameterError("truncation threshold must be > 0");
  if (!power_family(U)) {
    if (U.family() == Family::Truncated) throw UnsupportedError("kernel is already truncated");
    return block_integral(U, [f](double v) { return std::max(v - f, 0.0); });
  }
  if (U.alpha() == 0.0 || U.c() >= f) return std::max(lp_norm(U, 1.0).value - f, 0.0);
  const Level L = corner_level(U, f);
  return L.mass - f * L.measure;
}

double truncation_tail_mass(const KernelSpec& U, double f) {
  if (!(f > 0.0)) throw ParameterError("truncation threshold must be > 0");
  if (!power_family(U)) {
    if (U.family() == Family::Truncated) throw UnsupportedError("kernel is already truncated");
    return block_integral(U, [f](double v) { return v > f ? v : 0.0; });
  }
  if (U.alpha() == 0.0) return U.c() > f ? U.c() : 0.0;
  if (U.c() >= f) return lp_norm(U, 1.0).value;
  return corner_level(U, f).mass;
}

double truncation_l1_error_quadrature(const KernelSpec& U, double f, double rel_tol) {
  return integrate_over_square(U, f, rel_tol, [f](double a) { return std::max(a - f, 0.0); });
}

double truncation_tail_mass_quadrature(const KernelSpec& U, double f, double rel_tol) {
  return integrate_over_square(U, f, rel_tol, [f](double a) { return a > f ? a : 0.0; });
}

}  // namespace cutlab
