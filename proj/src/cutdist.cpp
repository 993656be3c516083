#include "cutlab/cutdist.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/rng.hpp"

namespace cutlab {
namespace {

using Perm = std::vector<std::size_t>;

// U - W o pi, with zero_diagonal kept only when both carry it.
StepKernel overlay_difference(const StepKernel& U, const StepKernel& W, const Perm& pi) {
  const std::size_t n = U.n();
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = U(i, j) - W(pi[i], pi[j]);
  return StepKernel(n, std::move(v), U.zero_diagonal() && W.zero_diagonal());
}

Perm inverse(const Perm& p) {
  Perm q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[p[i]] = i;
  return q;
}

// Aligns blocks by row sums: the r-th smallest row of U is matched with the
// r-th smallest row of W.
Perm sorted_alignment(const StepKernel& U, const StepKernel& W) {
  const std::size_t n = U.n();
  auto order = [n](const StepKernel& A) {
    std::vector<double> rs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) rs[i] += A(i, j);
    Perm o(n);
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return rs[a] < rs[b]; });
    return o;
  };
  const Perm ou = order(U), ow = order(W);
  Perm pi(n);
  for (std::size_t r = 0; r < n; ++r) pi[ou[r]] = ow[r];
  return pi;
}

struct Evaluation {
  double certified;
  double estimate;
  bool exact;
};

Evaluation evaluate(const StepKernel& U, const StepKernel& W, const Perm& pi,
                    const AnnealConfig& cfg) {
  const StepKernel D = overlay_difference(U, W, pi);
  if (D.n() <= kExactCutLimit) {
    const double v = cut_norm_exact(D).value;
    return {v, v, true};
  }
  const double est = cut_norm_heuristic(D, cfg.heuristic_restarts, 0x5eed).value;
  return {std::max(cut_norm_certified_upper(D), est), est, false};
}

class Annealer {
 public:
  Annealer(const StepKernel& U, const StepKernel& W, const AnnealConfig& cfg)
      : U_(U), W_(W), cfg_(cfg), n_(U.n()) {}

  double objective(const Perm& pi) const {
    if (cfg_.objective == AnnealObjective::Frobenius) {
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          const double d = U_(i, j) - W_(pi[i], pi[j]);
          s += d * d;
        }
      return s;
    }
    const StepKernel D = overlay_difference(U_, W_, pi);
    if (n_ <= cfg_.exact_objective_limit) return cut_norm_exact(D).value;
    return cut_norm_heuristic(D, cfg_.heuristic_restarts, 0x5eed).value;
  }

  // objective(pi with a,b swapped) - objective(pi), given cur = objective(pi).
  double delta(Perm& pi, std::size_t a, std::size_t b, double cur) const {
    if (cfg_.objective == AnnealObjective::Frobenius) {
      const std::size_t pa = pi[a], pb = pi[b];
      auto sq = [](double x) { return x * x; };
      double d = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == a || j == b) continue;
        const std::size_t pj = pi[j];
        d += sq(U_(a, j) - W_(pb, pj)) + sq(U_(b, j) - W_(pa, pj)) - sq(U_(a, j) - W_(pa, pj)) -
             sq(U_(b, j) - W_(pb, pj));
      }
      d *= 2.0;
      d += sq(U_(a, a) - W_(pb, pb)) + sq(U_(b, b) - W_(pa, pa)) - sq(U_(a, a) - W_(pa, pa)) -
           sq(U_(b, b) - W_(pb, pb));
      return d;
    }
    std::swap(pi[a], pi[b]);
    const double v = objective(pi);
    std::swap(pi[a], pi[b]);
    return v - cur;
  }

  Perm run(const Perm& start, std::uint64_t seed) const {
    Stream rng(seed);
    Perm pi = start;
    double cur = objective(pi);
    Perm best = pi;
    double best_v = cur;

    double temp = cfg_.initial_temperature;
    if (!(temp > 0.0)) {
      std::vector<double> d;
      for (int t = 0; t < 100; ++t) {
        const auto [a, b] = pick(rng);
        d.push_back(std::abs(delta(pi, a, b, cur)));
      }
      std::nth_element(d.begin(), d.begin() + 50, d.end());
      temp = d[50] > 0.0 ? d[50] : 1e-12;
    }

    const long proposals = static_cast<long>(cfg_.proposals_per_block) * static_cast<long>(n_);
    for (int sweep = 0; sweep < cfg_.sweeps; ++sweep) {
      for (long t = 0; t < proposals; ++t) {
        const auto [a, b] = pick(rng);
        const double d = delta(pi, a, b, cur);
        if (d <= 0.0 || rng.uniform() < std::exp(-d / temp)) {
          std::swap(pi[a], pi[b]);
          cur += d;
          if (cur < best_v) {
            best_v = cur;
            best = pi;
          }
        }
      }
      temp *= cfg_.cooling;
      if (cfg_.objective == AnnealObjective::Frobenius) cur = objective(pi);
    }
    return best;
  }

 private:
  std::pair<std::size_t, std::size_t> pick(Stream& rng) const {
    const std::size_t a = rng.below(n_);
    std::size_t b = rng.below(n_ - 1);
    if (b >= a) ++b;
    return {a, b};
  }

  const StepKernel& U_;
  const StepKernel& W_;
  const AnnealConfig& cfg_;
  std::size_t n_;
};

CutDistanceEstimate one_direction(const StepKernel& U, const StepKernel& W,
                                  const AnnealConfig& cfg, std::uint64_t seed) {
  const std::size_t n = U.n();
  CutDistanceEstimate est;
  est.blowup_size = n;

  if (n <= kExactPermLimit) {
    Perm pi(n);
    std::iota(pi.begin(), pi.end(), 0);
    double best = -1.0;
    do {
      const double v = cut_norm_exact(overlay_difference(U, W, pi)).value;
      if (best < 0.0 || v < best) {
        best = v;
        est.permutation = pi;
      }
    } while (std::next_permutation(pi.begin(), pi.end()));
    est.upper = est.estimate = best;
    est.estimate_exact = true;
    est.method = DistMethod::ExactPerm;
    return est;
  }

  if (cfg.restarts < 1 || cfg.sweeps < 0 || cfg.proposals_per_block < 0 ||
      !(cfg.cooling > 0.0 && cfg.cooling <= 1.0))
    throw ParameterError("invalid annealing budget");
  const Annealer annealer(U, W, cfg);
  const Perm start = sorted_alignment(U, W);
  est.method = DistMethod::Annealed;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    const Perm pi = annealer.run(start, derive_seed(seed, "anneal", r));
    const Evaluation e = evaluate(U, W, pi, cfg);
    if (!have || e.certified < est.upper) {
      have = true;
      est.upper = e.certified;
      est.estimate = e.estimate;
      est.estimate_exact = e.exact;
      est.permutation = pi;
    }
  }
  return est;
}

std::size_t common_size(std::size_t a, std::size_t b) {
  const std::size_t N = std::lcm(a, b);
  if (N > kCommonSizeLimit)
    throw SizeError("common blow-up size " + std::to_string(N) + " exceeds " +
                    std::to_string(kCommonSizeLimit));
  return N;
}

// Exact cut norm where certifiable, otherwise nothing.
std::optional<double> certified_cut_norm(const StepKernel& A) {
  const std::size_t n = A.n();
  if (A.nonnegative() || A.nonpositive())
    return std::abs(A.grand_sum()) / static_cast<double>(n * n);
  if (n <= kExactCutLimit) return cut_norm_exact(A).value;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(DistMethod m) {
  return m == DistMethod::ExactPerm ? "exact-perm" : "annealed";
}

StepKernel blowup(const StepKernel& W, std::size_t t) {
  if (t < 1) throw ParameterError("blow-up factor must be >= 1");
  const std::size_t n = W.n(), N = n * t;
  if (N > kBlowupLimit)
    throw SizeError("blow-up size " + std::to_string(N) + " exceeds " + std::to_string(kBlowupLimit));
  if (t == 1) return W;
  std::vector<double> v(N * N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) v[i * N + j] = W(i / t, j / t);
  return StepKernel(N, std::move(v), W.zero_diagonal());
}

double cut_norm_certified_upper(const StepKernel& A) {
  const std::size_t n = A.n();
  const double l1 = A.l1_norm();
  if (n > kCommonSizeLimit * 2) return l1;
  Eigen::MatrixXd M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = A(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const double sigma = es.eigenvalues().cwiseAbs().maxCoeff();
  // |1_S^T A 1_T| <= sigma * sqrt(|S||T|) <= sigma * n; normalizing by n^2.
  return std::min(l1, sigma / static_cast<double>(n));
}

CutDistanceEstimate cut_distance_upper(const StepKernel& U, const StepKernel& W,
                                       const AnnealConfig& cfg, std::uint64_t seed) {
  const std::size_t N = common_size(U.n(), W.n());
  const StepKernel Ub = blowup(U, N / U.n()), Wb = blowup(W, N / W.n());
  CutDistanceEstimate a = one_direction(Ub, Wb, cfg, seed);
  CutDistanceEstimate b = one_direction(Wb, Ub, cfg, seed);
  // ||W - U o s|| = ||U - W o s^-1||, so the reverse run yields a witness too.
  if (b.upper < a.upper) {
    b.permutation = inverse(b.permutation);
    a = std::move(b);
  }
  // upper is certified, so lower can only exceed it by rounding.
  a.lower = std::min(cut_distance_lower(U, W), a.upper);
  a.blowup_size = N;
  return a;
}

double cut_distance_lower(const StepKernel& U, const StepKernel& W) {
  const auto a = certified_cut_norm(U);
  const auto b = certified_cut_norm(W);
  if (!a || !b) return 0.0;
  return std::abs(*a - *b);
}

namespace {

// int_lo^hi |g(x) - v| dx for g(x) = (1-x)^-alpha, increasing on [lo, hi].
double power_abs_deviation(double alpha, double lo, double hi, double v) {
  const double b = 1.0 - alpha;
  auto G = [b](double x) { return -std::pow(1.0 - x, b) / b; };  // primitive of g
  if (alpha == 0.0) return (hi - lo) * std::abs(1.0 - v);
  const double glo = std::pow(1.0 - lo, -alpha);
  if (v <= glo) return (G(hi) - G(lo)) - v * (hi - lo);
  const double ghi = hi < 1.0 ? std::pow(1.0 - hi, -alpha) : INFINITY;
  if (v >= ghi) return v * (hi - lo) - (G(hi) - G(lo));
  const double xs = std::clamp(1.0 - std::pow(v, -1.0 / alpha), lo, hi);
  return (v * (xs - lo) - (G(xs) - G(lo))) + ((G(hi) - G(xs)) - v * (hi - xs));
}

Discretization discretize_power(const KernelSpec& U, int m) {
  const double a = U.alpha(), b = 1.0 - a, c = U.c();
  const bool sgn = U.family() == Family::SignedPow;
  auto I = [a, b](double lo, double hi) {
    if (a == 0.0) return hi - lo;
    return (std::pow(1.0 - lo, b) - std::pow(1.0 - hi, b)) / b;
  };
  std::vector<double> avg(m);  // block means of the signed factor
  double dev = 0.0;            // || phi - bar phi ||_1
  for (int i = 0; i < m; ++i) {
    const double lo = static_cast<double>(i) / m, hi = static_cast<double>(i + 1) / m;
    if (!sgn) {
      avg[i] = I(lo, hi) * m;
      dev += power_abs_deviation(a, lo, hi, avg[i]);
    } else if (hi <= 0.5) {
      avg[i] = I(lo, hi) * m;
      dev += power_abs_deviation(a, lo, hi, avg[i]);
    } else if (lo >= 0.5) {
      avg[i] = -I(lo, hi) * m;
      dev += power_abs_deviation(a, lo, hi, -avg[i]);
    } else {
      avg[i] = (I(lo, 0.5) - I(0.5, hi)) * m;
      // |g - v| on the positive piece, |(-g) - v| = |g + v| on the negative one.
      dev += power_abs_deviation(a, lo, 0.5, avg[i]) + power_abs_deviation(a, 0.5, hi, -avg[i]);
    }
  }
  const std::size_t n = static_cast<std::size_t>(m);
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) v[i * n + j] = v[j * n + i] = c * avg[i] * avg[j];
  const double phi_l1 = I(0.0, 1.0);
  return {StepKernel(n, std::move(v)), 2.0 * c * phi_l1 * dev};
}

// Exact averaging of a step kernel on an m0 grid onto an m grid; the error
// is computed exactly on the common refinement.
Discretization discretize_step(const StepKernel& S0, int m) {
  const std::size_t m0 = S0.n(), n = static_cast<std::size_t>(m);
  std::vector<double> cuts;
  for (std::size_t i = 0; i <= m0; ++i) cuts.push_back(static_cast<double>(i) / m0);
  for (std::size_t i = 0; i <= n; ++i) cuts.push_back(static_cast<double>(i) / m);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-15; }),
             cuts.end());
  struct Cell {
    std::size_t fine, coarse;
    double len;
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    cells.push_back({std::min(m0 - 1, static_cast<std::size_t>(mid * m0)),
                     std::min(n - 1, static_cast<std::size_t>(mid * n)), cuts[k + 1] - cuts[k]});
  }
  std::vector<double> v(n * n, 0.0);
  for (const Cell& x : cells)
    for (const Cell& y : cells)
      if (x.coarse <= y.coarse) v[x.coarse * n + y.coarse] += x.len * y.len * S0(x.fine, y.fine);
  const double area = 1.0 / static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      v[i * n + j] /= area;
      v[j * n + i] = v[i * n + j];
    }
  double err = 0.0;
  bool exact = (m % static_cast<int>(m0)) == 0;
  if (exact) {
    for (const Cell& x : cells)
      for (const Cell& y : cells) v[x.coarse * n + y.coarse] = S0(x.fine, y.fine);
  } else {
    for (const Cell& x : cells)
      for (const Cell& y : cells)
        err += x.len * y.len * std::abs(S0(x.fine, y.fine) - v[x.coarse * n + y.coarse]);
  }
  return {StepKernel(n, std::move(v)), err};
}

}  // namespace

Discretization discretize_kernel(const KernelSpec& U, int m) {
  if (m < 1) throw ParameterError("discretization needs m >= 1");
  if (static_cast<std::size_t>(m) > kCommonSizeLimit)
    throw SizeError("discretization size exceeds " + std::to_string(kCommonSizeLimit));
  switch (U.family()) {
    case Family::PowCorner:
    case Family::SignedPow: return discretize_power(U, m);
    case Family::Checkerboard:
    case Family::Step: return discretize_step(as_step_kernel(U), m);
    case Family::Truncated:
      if (U.source().family() == Family::Checkerboard || U.source().family() == Family::Step)
        return discretize_step(as_step_kernel(U), m);
      throw UnsupportedError("no certified discretization bound for truncated power kernels");
  }
  throw UnsupportedError("unsupported family");
}

}  // namespace cutlab
