#include "cutlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/quadrature.hpp"
#include "cutlab/rng.hpp"

namespace cutlab {
namespace {

void require_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError(std::string(name) + " = " + std::to_string(x) + " lies outside [0,1]");
}

int block_of(double x, int m) {
  const int b = static_cast<int>(std::floor(x * m));
  return std::clamp(b, 0, m - 1);
}

bool power_family(Family f) { return f == Family::PowCorner || f == Family::SignedPow; }

// Block values of a checkerboard or step kernel, optionally clamped.
std::vector<double> block_values(const KernelSpec& U) {
  if (U.family() == Family::Checkerboard) {
    const int m = U.m_blocks();
    std::vector<double> v(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) v[i * m + j] = ((i + j) % 2 == 0 ? 1.0 : -1.0) * U.c();
    return v;
  }
  if (U.family() == Family::Step) return U.step_values();
  if (U.family() == Family::Truncated && !power_family(U.source().family())) {
    std::vector<double> v = block_values(U.source());
    for (double& x : v) x = std::clamp(x, -U.threshold(), U.threshold());
    return v;
  }
  throw UnsupportedError("kernel family has no block representation");
}

// Distance coordinates: the power families depend on w = u*v with u = 1-x.
// Level t with c * w^-alpha = f.
double clamp_level(double c, double alpha, double f) { return std::pow(c / f, 1.0 / alpha); }

// int_t^1 w^-a (-ln w) dw for t in (0,1].
double log_weighted_tail(double a, double t) {
  const double b = 1.0 - a;
  const double lt = std::log(t);
  if (std::abs(b) < 1e-12) return 0.5 * lt * lt;
  const double tb = std::pow(t, b);
  return 1.0 / (b * b) - tb * (1.0 / (b * b) - lt / b);
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::PowCorner: return "pow_corner";
    case Family::SignedPow: return "signed_pow";
    case Family::Checkerboard: return "checkerboard";
    case Family::Step: return "step";
    case Family::Truncated: return "truncated";
  }
  return "?";
}

Family family_from_string(std::string_view s) {
  if (s == "pow_corner") return Family::PowCorner;
  if (s == "signed_pow") return Family::SignedPow;
  if (s == "checkerboard") return Family::Checkerboard;
  if (s == "step") return Family::Step;
  if (s == "truncated") return Family::Truncated;
  throw ParameterError("unknown kernel family '" + std::string(s) + "'");
}

std::string_view to_string(NormMethod m) {
  switch (m) {
    case NormMethod::Analytic: return "analytic";
    case NormMethod::Quadrature: return "quadrature";
    case NormMethod::ExactStep: return "exact-step";
  }
  return "?";
}

std::string_view to_string(CutMethod m) {
  switch (m) {
    case CutMethod::Analytic: return "analytic";
    case CutMethod::AnalyticRank1: return "analytic-rank1";
    case CutMethod::ExactStep: return "exact-step";
  }
  return "?";
}

KernelSpec KernelSpec::pow_corner(double alpha, double c) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in [0,1)");
  if (!(c > 0.0)) throw ParameterError("scale c must be > 0");
  KernelSpec k;
  k.family_ = Family::PowCorner;
  k.alpha_ = alpha;
  k.c_ = c;
  return k;
}

KernelSpec KernelSpec::signed_pow(double alpha, double c) {
  KernelSpec k = pow_corner(alpha, c);
  k.family_ = Family::SignedPow;
  return k;
}

KernelSpec KernelSpec::checkerboard(int m, double c) {
  if (m < 1) throw ParameterError("checkerboard needs m >= 1");
  if (!(c > 0.0)) throw ParameterError("scale c must be > 0");
  KernelSpec k;
  k.family_ = Family::Checkerboard;
  k.m_ = m;
  k.c_ = c;
  return k;
}

KernelSpec KernelSpec::step(int m, std::vector<double> values) {
  if (m < 1) throw ParameterError("step kernel needs m >= 1");
  // StepKernel validates shape and symmetry.
  StepKernel check(static_cast<std::size_t>(m), values);
  KernelSpec k;
  k.family_ = Family::Step;
  k.m_ = m;
  k.values_ = std::move(values);
  k.c_ = std::max(check.max_abs(), 0.0);
  return k;
}

KernelSpec KernelSpec::truncated(const KernelSpec& source, double threshold) {
  if (!(threshold > 0.0)) throw ParameterError("truncation threshold must be > 0");
  if (source.family() == Family::Truncated)
    return truncated(source.source(), std::min(threshold, source.threshold()));
  KernelSpec k;
  k.family_ = Family::Truncated;
  k.threshold_ = threshold;
  k.source_ = std::make_shared<const KernelSpec>(source);
  k.alpha_ = source.alpha_;
  k.c_ = source.c_;
  k.m_ = source.m_;
  return k;
}

const KernelSpec& KernelSpec::source() const {
  if (!source_) throw UnsupportedError("kernel is not a truncation");
  return *source_;
}

bool KernelSpec::singular() const noexcept { return power_family(family_) && alpha_ > 0.0; }

bool KernelSpec::nonnegative() const noexcept {
  switch (family_) {
    case Family::PowCorner: return true;
    case Family::SignedPow: return false;
    case Family::Checkerboard: return m_ == 1;
    case Family::Step:
      return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
    case Family::Truncated: return source_->nonnegative();
  }
  return false;
}

double KernelSpec::sup_norm() const {
  switch (family_) {
    case Family::PowCorner:
    case Family::SignedPow:
      if (alpha_ > 0.0) throw IntegrabilityError("unbounded kernel has no finite sup norm");
      return c_;
    case Family::Checkerboard: return c_;
    case Family::Step: {
      double m = 0.0;
      for (double v : values_) m = std::max(m, std::abs(v));
      return m;
    }
    case Family::Truncated: {
      const KernelSpec& s = *source_;
      if (s.singular()) return threshold_;
      return std::min(threshold_, s.sup_norm());
    }
  }
  return 0.0;
}

double ProductForm::factor(double x) const {
  const double g = alpha == 0.0 ? 1.0 : std::pow(1.0 - x, -alpha);
  return (signed_factor && x >= 0.5) ? -g : g;
}

double ProductForm::abs_factor(double x) const {
  return alpha == 0.0 ? 1.0 : std::pow(1.0 - x, -alpha);
}

std::optional<ProductForm> product_form(const KernelSpec& U) {
  if (U.family() == Family::PowCorner) return ProductForm{U.c(), U.alpha(), false};
  if (U.family() == Family::SignedPow) return ProductForm{U.c(), U.alpha(), true};
  return std::nullopt;
}

double eval(const KernelSpec& U, double x, double y) {
  require_unit(x, "x");
  require_unit(y, "y");
  switch (U.family()) {
    case Family::PowCorner:
    case Family::SignedPow: {
      if (U.alpha() > 0.0 && (x == 1.0 || y == 1.0))
        throw DomainError("point lies on the singular edge of the kernel");
      double v = U.alpha() == 0.0 ? U.c() : U.c() * std::pow((1.0 - x) * (1.0 - y), -U.alpha());
      if (U.family() == Family::SignedPow && ((x >= 0.5) != (y >= 0.5))) v = -v;
      return v;
    }
    case Family::Checkerboard: {
      const int i = block_of(x, U.m_blocks()), j = block_of(y, U.m_blocks());
      return (i + j) % 2 == 0 ? U.c() : -U.c();
    }
    case Family::Step: {
      const int m = U.m_blocks();
      return U.step_values()[block_of(x, m) * m + block_of(y, m)];
    }
    case Family::Truncated:
      return std::clamp(eval(U.source(), x, y), -U.threshold(), U.threshold());
  }
  return 0.0;
}

double eval_reflected(const KernelSpec& U, double u, double v) {
  switch (U.family()) {
    case Family::PowCorner:
    case Family::SignedPow: {
      if (U.alpha() > 0.0 && (u <= 0.0 || v <= 0.0))
        throw DomainError("point lies on the singular edge of the kernel");
      double val = U.alpha() == 0.0
                       ? U.c()
                       : U.c() * std::pow(u, -U.alpha()) * std::pow(v, -U.alpha());
      if (U.family() == Family::SignedPow && ((u > 0.5) != (v > 0.5))) val = -val;
      return val;
    }
    case Family::Truncated:
      return std::clamp(eval_reflected(U.source(), u, v), -U.threshold(), U.threshold());
    default: return eval(U, 1.0 - u, 1.0 - v);
  }
}

NormValue lp_norm(const KernelSpec& U, double p) {
  if (!(p >= 1.0)) throw ParameterError("lp_norm needs p >= 1");
  switch (U.family()) {
    case Family::PowCorner:
    case Family::SignedPow: {
      if (U.alpha() * p >= 1.0)
        throw IntegrabilityError("kernel is not in L^p: alpha * p = " +
                                 std::to_string(U.alpha() * p) + " >= 1");
      return {U.c() * std::pow(1.0 - U.alpha() * p, -2.0 / p), NormMethod::Analytic};
    }
    case Family::Checkerboard: return {U.c(), NormMethod::Analytic};
    case Family::Step:
      return {StepKernel(U.m_blocks(), U.step_values()).lp_norm(p), NormMethod::ExactStep};
    case Family::Truncated: {
      const KernelSpec& s = U.source();
      const double f = U.threshold();
      if (!power_family(s.family())) {
        const int m = s.m_blocks();
        return {StepKernel(m, block_values(U)).lp_norm(p), NormMethod::ExactStep};
      }
      const double c = s.c(), a = s.alpha();
      if (a == 0.0 || c >= f) return {std::min(c, f), NormMethod::Analytic};
      // |U*| = min(c w^-a, f) with w = (1-x)(1-y), whose density is -ln w.
      const double t = clamp_level(c, a, f);
      const double clamped = std::pow(f, p) * (t - t * std::log(t));
      const double free = std::pow(c, p) * log_weighted_tail(a * p, t);
      return {std::pow(clamped + free, 1.0 / p), NormMethod::Analytic};
    }
  }
  return {0.0, NormMethod::Analytic};
}

double lp_norm_quadrature(const KernelSpec& U, double p, double rel_tol) {
  if (!(p >= 1.0)) throw ParameterError("lp_norm needs p >= 1");
  if (U.singular() && U.alpha() * p >= 1.0)
    throw IntegrabilityError("kernel is not in L^p");
  const bool singular = U.singular() || (U.family() == Family::Truncated && U.source().singular());
  std::vector<double> breaks;
  if (U.family() == Family::SignedPow) breaks.push_back(0.5);
  if (U.family() == Family::Checkerboard || U.family() == Family::Step)
    for (int i = 1; i < U.m_blocks(); ++i) breaks.push_back(static_cast<double>(i) / U.m_blocks());
  auto inner = [&](double u) {
    std::vector<double> local = breaks;
    if (U.family() == Family::Truncated && U.source().singular() && U.c() < U.threshold()) {
      const double t = clamp_level(U.c(), U.alpha(), U.threshold());
      if (t / u < 1.0) local.push_back(t / u);
    }
    auto h = [&](double v) { return std::pow(std::abs(eval_reflected(U, u, v)), p); };
    return quad::integrate_unit(h, singular, rel_tol * 0.1, local).value;
  };
  const double total = quad::integrate_unit(inner, singular, rel_tol, breaks).value;
  return std::pow(total, 1.0 / p);
}

double section_integral(const KernelSpec& U, double x) {
  require_unit(x, "x");
  switch (U.family()) {
    case Family::PowCorner:
    case Family::SignedPow:
      if (U.alpha() > 0.0 && x == 1.0) throw DomainError("x lies on the singular edge");
      return U.c() * std::pow(1.0 - x, -U.alpha()) / (1.0 - U.alpha());
    case Family::Checkerboard: return U.c();
    case Family::Step: {
      const int m = U.m_blocks();
      const int i = block_of(x, m);
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += std::abs(U.step_values()[i * m + j]);
      return s / m;
    }
    case Family::Truncated: {
      const KernelSpec& s = U.source();
      const double f = U.threshold();
      if (!power_family(s.family())) {
        const int m = s.m_blocks();
        const std::vector<double> v = block_values(U);
        const int i = block_of(x, m);
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += std::abs(v[i * m + j]);
        return acc / m;
      }
      const double c = s.c(), a = s.alpha();
      if (a == 0.0 || c >= f) return std::min(c, f);
      const double u = 1.0 - x;
      const double t = clamp_level(c, a, f);
      if (u <= t) return f;
      const double r = t / u;
      return f * r + c * std::pow(u, -a) * (1.0 - std::pow(r, 1.0 - a)) / (1.0 - a);
    }
  }
  return 0.0;
}

double section_integral_quadrature(const KernelSpec& U, double x, double rel_tol) {
  require_unit(x, "x");
  const double u = 1.0 - x;
  const bool singular = U.singular() || (U.family() == Family::Truncated && U.source().singular());
  std::vector<double> breaks;
  if (U.family() == Family::SignedPow) breaks.push_back(0.5);
  if (U.family() == Family::Checkerboard || U.family() == Family::Step ||
      (U.family() == Family::Truncated && !power_family(U.source().family())))
    for (int i = 1; i < U.m_blocks(); ++i) breaks.push_back(1.0 - static_cast<double>(i) / U.m_blocks());
  if (U.family() == Family::Truncated && U.source().singular() && U.c() < U.threshold()) {
    const double t = clamp_level(U.c(), U.alpha(), U.threshold());
    if (t / u < 1.0) breaks.push_back(t / u);
  }
  auto h = [&](double v) { return std::abs(eval_reflected(U, u, v)); };
  return quad::integrate_unit(h, singular, rel_tol, breaks).value;
}

StepKernel as_step_kernel(const KernelSpec& U) {
  const std::vector<double> v = block_values(U);
  const int m = U.family() == Family::Truncated ? U.source().m_blocks() : U.m_blocks();
  return StepKernel(static_cast<std::size_t>(m), v);
}

CutReference cut_norm_reference(const KernelSpec& U) {
  switch (U.family()) {
    case Family::PowCorner: return {lp_norm(U, 1.0).value, CutMethod::Analytic};
    case Family::SignedPow: {
      // Rank one: U = c f(x) f(y) with f = s * g, so the sup is c * max(F+, F-)^2.
      const double b = 1.0 - U.alpha();
      const double neg = std::pow(0.5, b) / b;   // int_{1/2}^1 (1-x)^-alpha
      const double pos = (1.0 - std::pow(0.5, b)) / b;
      const double m = std::max(pos, neg);
      return {U.c() * m * m, CutMethod::AnalyticRank1};
    }
    case Family::Checkerboard:
    case Family::Step: return {cut_norm_exact(as_step_kernel(U)).value, CutMethod::ExactStep};
    case Family::Truncated: {
      const KernelSpec& s = U.source();
      if (s.nonnegative()) return {lp_norm(U, 1.0).value, CutMethod::Analytic};
      if (!power_family(s.family()))
        return {cut_norm_exact(as_step_kernel(U)).value, CutMethod::ExactStep};
      throw UnsupportedError("no closed-form cut norm for a truncated signed power kernel");
    }
  }
  throw UnsupportedError("unsupported family");
}

double cut_norm_plus_reference(const KernelSpec& U) {
  if (U.nonnegative()) return lp_norm(U, 1.0).value;
  if (U.family() == Family::SignedPow) return cut_norm_reference(U).value;
  if (U.family() == Family::Checkerboard || U.family() == Family::Step ||
      (U.family() == Family::Truncated && !power_family(U.source().family())))
    return cut_norm_plus_exact(as_step_kernel(U)).value;
  throw UnsupportedError("no closed-form one-sided cut norm for this kernel");
}

SamplePoints draw_points(std::size_t k, std::uint64_t seed) {
  SamplePoints X;
  X.k = k;
  X.seed = seed;
  X.coords.resize(k);
  Stream rng(seed);
  for (double& x : X.coords) x = rng.uniform();
  return X;
}

StepKernel sample_kernel(const KernelSpec& U, const SamplePoints& X) {
  const std::size_t k = X.coords.size();
  std::vector<double> v(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double u = eval(U, X.coords[i], X.coords[j]);
      v[i * k + j] = u;
      v[j * k + i] = u;
    }
  return StepKernel(k, std::move(v), true);
}

Sample draw_sample(const KernelSpec& U, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ParameterError("sample size k must be >= 2");
  SamplePoints X = draw_points(k, seed);
  StepKernel W = sample_kernel(U, X);
  return {std::move(X), std::move(W)};
}

double sample_offdiag_sum(const KernelSpec& U, const SamplePoints& X) {
  if (auto pf = product_form(U)) {
    double s1 = 0.0, s2 = 0.0;
    for (double x : X.coords) {
      const double f = pf->factor(x);
      s1 += f;
      s2 += f * f;
    }
    return pf->c * (s1 * s1 - s2);
  }
  double s = 0.0;
  const std::size_t k = X.coords.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) s += eval(U, X.coords[i], X.coords[j]);
  return 2.0 * s;
}

double sample_offdiag_sq_sum(const KernelSpec& U, const SamplePoints& X) {
  if (auto pf = product_form(U)) {
    double s2 = 0.0, s4 = 0.0;
    for (double x : X.coords) {
      const double f = pf->factor(x);
      s2 += f * f;
      s4 += f * f * f * f;
    }
    return pf->c * pf->c * (s2 * s2 - s4);
  }
  double s = 0.0;
  const std::size_t k = X.coords.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double u = eval(U, X.coords[i], X.coords[j]);
      s += u * u;
    }
  return 2.0 * s;
}

std::vector<double> sample_abs_row_sums(const KernelSpec& U, const SamplePoints& X) {
  const std::size_t k = X.coords.size();
  std::vector<double> rows(k, 0.0);
  if (auto pf = product_form(U)) {
    std::vector<double> g(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += (g[i] = pf->abs_factor(X.coords[i]));
    for (std::size_t j = 0; j < k; ++j) rows[j] = pf->c * g[j] * (total - g[j]);
    return rows;
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double u = std::abs(eval(U, X.coords[i], X.coords[j]));
      rows[i] += u;
      rows[j] += u;
    }
  return rows;
}

}  // namespace cutlab
