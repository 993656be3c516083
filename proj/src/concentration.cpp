#include "cutlab/concentration.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/rng.hpp"

namespace cutlab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& inequality, const std::string& got) {
  if (!ok) throw ParameterError("constraint violated: " + inequality + " (got " + got + ")");
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v))
    throw UnsupportedError(std::string(name) + " is not available for this kernel");
}

double binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0.0;
  r = std::min(r, n - r);
  double b = 1.0;
  for (std::size_t i = 1; i <= r; ++i) b = b * static_cast<double>(n - r + i) / static_cast<double>(i);
  return std::round(b);
}

// Advances a sorted r-combination of [0, n) in lexicographic order.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t r = c.size();
  for (std::size_t i = r; i-- > 0;) {
    if (c[i] < n - r + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < r; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

double k_pow(std::size_t k, double e) { return std::pow(static_cast<double>(k), e); }

// 2^p ||U||_p^p / (nu^p k^(gamma p) ||U||_1^p), the tail term shared by the
// L0 membership and dispersion statements.
double l0_tail_ratio(double l1, double lp, double p, double nu, double gamma, std::size_t k) {
  return std::pow(2.0 * lp / (nu * l1), p) / k_pow(k, gamma * p);
}

double slack(double rhs, double scale) { return 1e-12 * (std::abs(rhs) + scale + 1.0); }

}  // namespace

KernelNorms kernel_norms(const KernelSpec& U, double p) {
  KernelNorms n;
  n.p = p;
  n.l1 = lp_norm(U, 1.0).value;
  n.lp = lp_norm(U, p).value;
  try {
    n.l2 = lp_norm(U, 2.0).value;
  } catch (const IntegrabilityError&) {
    n.l2 = kNaN;
  }
  try {
    n.cut = cut_norm_reference(U).value;
  } catch (const UnsupportedError&) {
    n.cut = kNaN;
  }
  try {
    n.cut_plus = cut_norm_plus_reference(U);
  } catch (const UnsupportedError&) {
    n.cut_plus = kNaN;
  }
  n.sup = U.bounded() ? U.sup_norm() : kNaN;
  return n;
}

DeltaReport delta_U(const KernelSpec& U, const SamplePoints& X, double nu, double gamma) {
  const std::size_t k = X.coords.size();
  if (k < 2) throw ParameterError("constraint violated: k >= 2 (got k = " + std::to_string(k) + ")");
  const double l1 = lp_norm(U, 1.0).value;
  DeltaReport r;
  const std::vector<double> rows = sample_abs_row_sums(U, X);
  r.per_j_section.resize(k);
  r.per_j_average.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    r.per_j_section[j] = std::abs(section_integral(U, X.coords[j]) - l1);
    r.per_j_average[j] = std::abs(rows[j] / static_cast<double>(k - 1) - l1);
    r.delta_value = std::max({r.delta_value, r.per_j_section[j], r.per_j_average[j]});
  }
  r.in_L0 = r.delta_value <= nu * k_pow(k, gamma) * l1;
  return r;
}

double l0_probability_bound(const KernelSpec& U, double p, double nu, double gamma, std::size_t k) {
  require(gamma * p > 1.0, "gamma * p > 1", "gamma * p = " + fmt(gamma * p));
  require(nu > 0.0, "nu > 0", "nu = " + fmt(nu));
  const double l1 = lp_norm(U, 1.0).value, lp = lp_norm(U, p).value;
  return 1.0 - 2.0 * static_cast<double>(k) * l0_tail_ratio(l1, lp, p, nu, gamma, k);
}

double chebyshev_bound(double moment_p, double delta, double p) {
  require(moment_p >= 0.0, "E|Z|^p >= 0", fmt(moment_p));
  require(delta > 0.0, "delta > 0", "delta = " + fmt(delta));
  require(p >= 1.0, "p >= 1", "p = " + fmt(p));
  return std::min(1.0, std::pow(2.0 / delta, p) * moment_p);
}

SamplePoints replace_coordinate(const SamplePoints& X, std::size_t a, double x0) {
  if (a >= X.coords.size())
    throw std::out_of_range("replacement index " + std::to_string(a) + " outside a sample of size " +
                            std::to_string(X.coords.size()));
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("replacement point outside [0,1]");
  SamplePoints Y = X;
  Y.coords[a] = x0;
  return Y;
}

InequalityCheck replacement_inequality_check(const KernelSpec& U, const SamplePoints& X,
                                             std::size_t a, double x0, bool one_sided) {
  const std::size_t k = X.coords.size();
  if (k > kExactCutLimit)
    throw SizeError("replacement check needs exact cut norms, k <= " +
                    std::to_string(kExactCutLimit));
  const SamplePoints Y = replace_coordinate(X, a, x0);
  auto norm = [&](const SamplePoints& P) {
    const StepKernel W = sample_kernel(U, P);
    return one_sided ? cut_norm_plus_exact(W).value : cut_norm_exact(W).value;
  };
  const double kk = static_cast<double>(k * k);
  InequalityCheck c;
  c.lhs = std::abs(kk * norm(X) - kk * norm(Y));
  const double xa = X.coords[a];
  double s0 = 0.0, sa = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (j == a) continue;
    s0 += std::abs(eval(U, x0, X.coords[j]));
    sa += std::abs(eval(U, xa, X.coords[j]));
  }
  c.rhs = 2.0 * s0 + 2.0 * sa;
  c.holds = c.lhs <= c.rhs + slack(c.rhs, 0.0);
  return c;
}

double azuma_alpha(const KernelSpec& U, std::size_t k, double nu, double gamma) {
  if (k < 1) throw ParameterError("constraint violated: k >= 1 (got k = 0)");
  const double l1 = lp_norm(U, 1.0).value;
  return 6.0 / static_cast<double>(k) * l1 * (1.0 + nu * k_pow(k, gamma));
}

TailBound dispersion_tail_bound(const KernelSpec& U, const ConcentrationParams& prm,
                                std::size_t k) {
  require(prm.gamma * prm.p > 1.0, "gamma * p > 1", "gamma * p = " + fmt(prm.gamma * prm.p));
  require(prm.nu > 0.0, "nu > 0", "nu = " + fmt(prm.nu));
  require(prm.lambda > 0.0, "lambda > 0", "lambda = " + fmt(prm.lambda));
  const double l1 = lp_norm(U, 1.0).value, lp = lp_norm(U, prm.p).value;
  TailBound t;
  t.threshold = prm.lambda * azuma_alpha(U, k, prm.nu, prm.gamma) * std::sqrt(static_cast<double>(k));
  t.prob = 2.0 * std::exp(-2.0 * prm.lambda * prm.lambda) +
           2.0 * static_cast<double>(k) *
               std::min(1.0, l0_tail_ratio(l1, lp, prm.p, prm.nu, prm.gamma, k));
  return t;
}

std::pair<IndexSet, IndexSet> rplus_sets(const StepKernel& W, const IndexSet& R1,
                                         const IndexSet& R2) {
  const std::size_t n = W.n();
  IndexSet p1, p2;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i : R1) s += W(i, j);
    if (s > 0.0) p1.push_back(j);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j : R2) s += W(i, j);
    if (s > 0.0) p2.push_back(i);
  }
  return {std::move(p1), std::move(p2)};
}

SubsampleCheck bs12_check(const StepKernel& W, const IndexSet& R1, const IndexSet& R2,
                          std::size_t q, std::uint64_t seed) {
  const std::size_t k = W.n();
  if (q < 1 || q > k)
    throw ParameterError("constraint violated: 1 <= q <= k (got q = " + std::to_string(q) + ")");
  for (const IndexSet* R : {&R1, &R2})
    for (std::size_t i : *R)
      if (i >= k) throw std::out_of_range("index set entry outside [k]");

  std::vector<char> in_r2(k, 0);
  for (std::size_t j : R2) in_r2[j] = 1;
  // W({i}, R2) for every row, reused for each subset.
  std::vector<double> row_r2(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j : R2) row_r2[i] += W(i, j);

  auto term = [&](const std::vector<std::size_t>& Q) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t j : Q)
        if (in_r2[j]) s += W(i, j);
      if (s > 0.0) v += row_r2[i];
    }
    return v;
  };

  SubsampleCheck c;
  c.lhs = rectangle_sum(W, R1, R2);
  const double total = binomial(k, q);
  double mean = 0.0;
  if (total <= kExactSubsetBudget) {
    std::vector<std::size_t> Q(q);
    std::iota(Q.begin(), Q.end(), std::size_t{0});
    double sum = 0.0;
    do sum += term(Q);
    while (next_combination(Q, k));
    mean = sum / total;
  } else {
    c.exact = false;
    constexpr int kDraws = 10000;
    Stream rng(derive_seed(seed, "bs12"));
    std::vector<std::size_t> perm(k);
    double sum = 0.0, sq = 0.0;
    for (int d = 0; d < kDraws; ++d) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t i = 0; i < q; ++i) std::swap(perm[i], perm[i + rng.below(k - i)]);
      const double v = term(std::vector<std::size_t>(perm.begin(), perm.begin() + q));
      sum += v;
      sq += v * v;
    }
    mean = sum / kDraws;
    c.stderr_ = std::sqrt(std::max(0.0, sq / kDraws - mean * mean) / (kDraws - 1));
  }
  c.rhs = mean + static_cast<double>(k) * W.frobenius() / std::sqrt(static_cast<double>(q));
  c.holds = c.lhs <= c.rhs + slack(c.rhs, std::abs(c.lhs));
  return c;
}

SubsampleCheck bplus_upper_check(const StepKernel& W, std::size_t q) {
  const std::size_t k = W.n();
  if (k > 14) throw SizeError("q-subsample enumeration supports k <= 14, got k = " + std::to_string(k));
  if (q < 1 || q > k)
    throw ParameterError("constraint violated: 1 <= q <= k (got q = " + std::to_string(q) + ")");
  const double nq = binomial(k, q);
  if (nq * nq > kExactSubsetBudget)
    throw SizeError("q-subsample enumeration needs C(k,q)^2 <= 1e6");

  // Plus set of every subset R with |R| <= q, as a bit mask; W is symmetric so
  // row and column plus sets coincide.
  const std::uint32_t full = 1U << k;
  std::vector<std::uint32_t> plus(full, 0);
  std::vector<std::uint32_t> small;
  for (std::uint32_t R = 0; R < full; ++R) {
    if (static_cast<std::size_t>(std::popcount(R)) > q) continue;
    small.push_back(R);
    std::uint32_t m = 0;
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        if ((R >> i) & 1U) s += W(i, j);
      if (s > 0.0) m |= 1U << j;
    }
    plus[R] = m;
  }
  // W(A, B) for plus masks, memoized on the pair.
  std::unordered_map<std::uint64_t, double> memo;
  auto block = [&](std::uint32_t A, std::uint32_t B) {
    const std::uint64_t key = (std::uint64_t{A} << 32) | B;
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      if ((A >> i) & 1U)
        for (std::size_t j = 0; j < k; ++j)
          if ((B >> j) & 1U) s += W(i, j);
    memo.emplace(key, s);
    return s;
  };

  std::vector<std::uint32_t> subsets;
  {
    std::vector<std::size_t> Q(q);
    std::iota(Q.begin(), Q.end(), std::size_t{0});
    do {
      std::uint32_t m = 0;
      for (std::size_t i : Q) m |= 1U << i;
      subsets.push_back(m);
    } while (next_combination(Q, k));
  }
  auto submasks = [](std::uint32_t Q) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t s = Q;; s = (s - 1) & Q) {
      out.push_back(s);
      if (s == 0) break;
    }
    return out;
  };

  double sum = 0.0;
  for (std::uint32_t Q1 : subsets) {
    const auto sub1 = submasks(Q1);
    for (std::uint32_t Q2 : subsets) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::uint32_t R2 : submasks(Q2))
        for (std::uint32_t R1 : sub1) best = std::max(best, block(plus[R2], plus[R1]));
      sum += best;
    }
  }
  SubsampleCheck c;
  const double kk = static_cast<double>(k * k);
  c.lhs = cut_norm_plus_exact(W).value;
  c.rhs = sum / (nq * nq) / kk +
          2.0 / std::sqrt(static_cast<double>(q)) * W.frobenius() / static_cast<double>(k);
  c.holds = c.lhs <= c.rhs + slack(c.rhs, c.lhs);
  return c;
}

FrobeniusCheck frobenius_check(const KernelSpec& U, std::size_t k, int trials,
                               std::uint64_t seed) {
  if (trials < 100)
    throw ParameterError("constraint violated: trials >= 100 (got " + std::to_string(trials) + ")");
  if (k < 2) throw ParameterError("constraint violated: k >= 2 (got k = " + std::to_string(k) + ")");
  const double l2 = lp_norm(U, 2.0).value;
  const double kk = static_cast<double>(k * k);
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const SamplePoints X = draw_points(k, derive_seed(seed, "frobenius", k, t));
    const double v = sample_offdiag_sq_sum(U, X) / kk;
    sum += v;
    sq += v * v;
  }
  FrobeniusCheck f;
  f.empirical_mean_sq = sum / trials;
  f.target = (static_cast<double>(k) - 1.0) / static_cast<double>(k) * l2 * l2;
  const double var = std::max(0.0, sq / trials - f.empirical_mean_sq * f.empirical_mean_sq);
  f.stderr_ = std::sqrt(var / (trials - 1));
  const double diff = f.empirical_mean_sq - f.target;
  // A constant kernel gives a deterministic value; rounding is not a deviation.
  if (f.stderr_ <= 1e-12 * std::abs(f.target) || std::abs(diff) <= 1e-12 * std::abs(f.target))
    f.z_score = 0.0;
  else
    f.z_score = diff / f.stderr_;
  return f;
}

std::string_view to_string(BoundId id) {
  switch (id) {
    case BoundId::FirstUpper: return "first_upper";
    case BoundId::FirstLower: return "first_lower";
    case BoundId::FirstUpperNu: return "first_upper_nu";
    case BoundId::FirstLowerNu: return "first_lower_nu";
    case BoundId::SecondLemma: return "second_lemma";
    case BoundId::SecondLemmaBounded: return "second_lemma_bounded";
    case BoundId::SystematicLower: return "systematic_lower";
    case BoundId::SystematicUpper: return "systematic_upper";
    case BoundId::MaxExpect: return "max_expect";
    case BoundId::QSampleUpper: return "q_sample_upper";
  }
  return "?";
}

BoundId bound_from_string(std::string_view s) {
  for (BoundId id : {BoundId::FirstUpper, BoundId::FirstLower, BoundId::FirstUpperNu,
                     BoundId::FirstLowerNu, BoundId::SecondLemma, BoundId::SecondLemmaBounded,
                     BoundId::SystematicLower, BoundId::SystematicUpper, BoundId::MaxExpect,
                     BoundId::QSampleUpper})
    if (to_string(id) == s) return id;
  throw ParameterError("unknown bound id: " + std::string(s));
}

std::vector<std::pair<std::string, double>> second_lemma_chain(const KernelNorms& n, double p,
                                                               double phi, double k) {
  const double L = std::log(k);
  const double f = 3.0 * n.lp * std::pow(L, 1.0 / (2.0 * p));
  if (!(f > n.l1))
    throw ParameterError("constraint violated: f(k) > ||U||_1 (got f = " + fmt(f) + ")");
  const double trunc = std::pow(2.0, p + 1.0) * std::pow(n.lp, p) * f / std::pow(f - n.l1, p);
  const double lead = 30.0 * n.lp * std::pow(k, -0.25 + 0.25 / p);
  const double disp = 6.0 * std::sqrt(phi * p / 2.0) * (n.l1 + 2.0 * n.lp) * std::sqrt(L) *
                      std::pow(k, -0.5 + 1.0 / p + phi);
  const double bounded = 20.0 * f / std::sqrt(std::log2(k));
  return {{"truncation", trunc}, {"first_lemma_leading", lead}, {"dispersion", disp},
          {"bounded_second_lemma", bounded}, {"f_k", f}};
}

// Each summand is divided by the target rate (ln k)^(-1/2 + 1/(2p)); the
// first and last ratios tend to constants, the middle two decay like powers
// of k, so the supremum is attained at moderate k and a log-spaced scan of
// ln k over [ln 2, 200] with local refinement finds it.
double second_lemma_constant(const KernelNorms& n, double p, double phi) {
  const double scale = n.l1 + n.lp;
  auto ratio = [&](double L) {
    const auto chain = second_lemma_chain(n, p, phi, std::exp(L));
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += chain[i].second;
    return s / (scale * std::pow(L, -0.5 + 0.5 / p));
  };
  const double lo = std::log(std::log(2.0)), hi = std::log(200.0);
  constexpr int kGrid = 4000;
  double best = -1.0, best_t = lo;
  for (int i = 0; i <= kGrid; ++i) {
    const double t = lo + (hi - lo) * i / kGrid;
    const double r = ratio(std::exp(t));
    if (r > best) {
      best = r;
      best_t = t;
    }
  }
  // Golden-section refinement around the best grid point.
  const double h = (hi - lo) / kGrid;
  double a = std::max(lo, best_t - h), b = std::min(hi, best_t + h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (ratio(std::exp(c)) > ratio(std::exp(d))) b = d;
    else a = c;
  }
  return std::max(best, ratio(std::exp((a + b) / 2.0)));
}

BoundValue theorem_bound(BoundId id, const KernelNorms& n, const ConcentrationParams& prm,
                         std::size_t k) {
  require(k >= 2, "k >= 2", "k = " + std::to_string(k));
  const double p = prm.p, phi = prm.phi, gamma = prm.gamma, nu = prm.nu;
  const double kd = static_cast<double>(k), L = std::log(kd);
  if (std::abs(n.p - p) > 1e-12 && id != BoundId::SecondLemmaBounded &&
      id != BoundId::SystematicLower)
    throw ParameterError("kernel norms were computed for p = " + fmt(n.p) + ", bound asks for p = " +
                         fmt(p));
  BoundValue b;
  b.probability = kNaN;
  b.probability_alt = kNaN;
  const double rate_upper = std::pow(kd, -0.25 + 0.25 / p);
  const double nu_ratio = std::pow(2.0 * n.lp / (nu * n.l1), p);

  switch (id) {
    case BoundId::FirstUpper:
    case BoundId::FirstUpperNu: {
      require(p > 2.0, "p > 2", "p = " + fmt(p));
      require(phi > 0.0, "phi > 0", "phi = " + fmt(phi));
      double weight = n.l1 + 2.0 * n.lp;
      b.probability = 1.0 - 3.0 * std::pow(kd, -phi * p);
      if (id == BoundId::FirstUpperNu) {
        require(nu > 0.0, "nu > 0", "nu = " + fmt(nu));
        weight = (1.0 + nu) * n.l1;
        b.probability = 1.0 - (2.0 + nu_ratio) * std::pow(kd, -phi * p);
      }
      const double lead = 30.0 * n.lp * rate_upper;
      const double disp = 6.0 * std::sqrt(phi * p / 2.0) * weight * std::sqrt(L) /
                          std::pow(kd, (p - 3.0) / (4.0 * p) - phi) * rate_upper;
      b.value = lead + disp;
      b.terms = {{"leading", lead}, {"dispersion", disp}};
      break;
    }
    case BoundId::FirstLower:
    case BoundId::FirstLowerNu: {
      require(p > 2.0, "p > 2", "p = " + fmt(p));
      require(gamma > 1.0 / p, "gamma > 1/p", "gamma = " + fmt(gamma));
      require(gamma < 0.5, "gamma < 1/2", "gamma = " + fmt(gamma));
      require_finite(n.cut, "cut norm");
      double weight = n.l1 + 2.0 * n.lp;
      b.probability = 1.0 - 3.0 * std::pow(kd, 1.0 - gamma * p);
      if (id == BoundId::FirstLowerNu) {
        require(nu > 0.0, "nu > 0", "nu = " + fmt(nu));
        weight = (1.0 + nu) * n.l1;
        b.probability = 1.0 - (2.0 + nu_ratio) * std::pow(kd, 1.0 - gamma * p);
      }
      const double rate = std::pow(kd, -0.5 + gamma) * std::sqrt(L);
      const double sys = n.cut * rate;
      const double disp = std::sqrt(18.0 * (gamma * p - 1.0)) * weight * rate;
      b.value = -(sys + disp);
      b.terms = {{"systematic", sys}, {"dispersion", disp}};
      break;
    }
    case BoundId::SecondLemma: {
      require(p > 2.0, "p > 2", "p = " + fmt(p));
      require(phi > 0.0, "phi > 0", "phi = " + fmt(phi));
      require(phi < 0.5 - 1.0 / p, "phi < 1/2 - 1/p", "phi = " + fmt(phi));
      const double C = second_lemma_constant(n, p, phi);
      b.value = C * (n.l1 + n.lp) * std::pow(L, -0.5 + 0.5 / p);
      const double tail = std::exp(-kd * kd / (2.0 * std::log2(kd)));
      b.probability = 1.0 - tail - 3.0 * std::pow(kd, -phi * p);
      b.probability_alt = 1.0 - tail - 3.0 * std::pow(kd, -phi);
      b.terms = {{"C", C}};
      for (auto& t : second_lemma_chain(n, p, phi, kd)) b.terms.push_back(t);
      double chain = 0.0;
      for (std::size_t i = 1; i <= 4; ++i) chain += b.terms[i].second;
      b.terms.emplace_back("chain_total", chain);
      break;
    }
    case BoundId::SecondLemmaBounded: {
      require_finite(n.sup, "sup norm");
      b.value = 20.0 * n.sup / std::sqrt(std::log2(kd));
      b.probability = 1.0 - std::exp(-kd * kd / (2.0 * std::log2(kd)));
      break;
    }
    case BoundId::SystematicLower: {
      require_finite(n.cut, "cut norm");
      b.value = -n.cut / kd;
      break;
    }
    case BoundId::SystematicUpper: {
      require(p > 1.0, "p > 1", "p = " + fmt(p));
      b.value = 30.0 * n.lp * rate_upper;
      break;
    }
    case BoundId::MaxExpect:
    case BoundId::QSampleUpper: {
      require(p >= 2.0, "p >= 2", "p = " + fmt(p));
      std::size_t q = static_cast<std::size_t>(std::max(prm.q, 1));
      double g = gamma;
      if (id == BoundId::QSampleUpper) {
        g = 1.0 / p;
        q = static_cast<std::size_t>(std::ceil(std::pow(kd, 0.5 - 1.0 / p) / std::sqrt(L)));
        q = std::clamp<std::size_t>(q, 1, k);
      }
      require(g > 0.0, "gamma > 0", "gamma = " + fmt(g));
      require(q <= k, "q <= k", "q = " + std::to_string(q));
      const double qd = static_cast<double>(q);
      const double kappa = std::pow(2.0, p + 1.0) * std::pow(n.lp / n.l1, p) *
                           std::pow(kd, 1.0 - g * p);
      const double mixed = 4.0 * (kd + qd) * qd * n.l1;
      const double tail = 4.0 * std::pow(kd, g) * (kd - 1.0) * std::sqrt(kd * L) * n.l1 *
                          std::sqrt(qd * p * (g + 3.0) / 2.0) *
                          (1.0 + 3.0 * kappa / (2.0 * p - 3.0));
      if (id == BoundId::MaxExpect) {
        require_finite(n.cut_plus, "one-sided cut norm");
        const double main = (kd - qd) * (kd - qd) * n.cut_plus;
        b.value = main + mixed + tail;
        b.terms = {{"main", main}, {"mixed", mixed}, {"tail", tail}};
      } else {
        // E||U_X||+ <= max_expect / k^2 + (2/sqrt q) E||U_X||_2 and
        // E||U_X||_2 <= ||U||_2; the main term contributes at most ||U||+.
        require_finite(n.l2, "L2 norm");
        const double frob = 2.0 * n.l2 / std::sqrt(qd);
        b.value = (mixed + tail) / (kd * kd) + frob;
        b.terms = {{"q", qd}, {"mixed", mixed / (kd * kd)}, {"tail", tail / (kd * kd)},
                   {"frobenius", frob}};
      }
      break;
    }
  }
  return b;
}

BoundValue theorem_bound(BoundId id, const KernelSpec& U, const ConcentrationParams& prm,
                         std::size_t k) {
  return theorem_bound(id, kernel_norms(U, prm.p), prm, k);
}

}  // namespace cutlab
