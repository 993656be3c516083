#include "cutlab/cutnorm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "cutlab/errors.hpp"
#include "cutlab/rng.hpp"

namespace cutlab {
namespace {

void guard(const StepKernel& W, std::size_t limit, const char* what) {
  if (W.n() > limit)
    throw SizeError(std::string(what) + " supports n <= " + std::to_string(limit) + ", got n = " +
                    std::to_string(W.n()));
}

std::vector<std::size_t> mask_indices(std::uint64_t mask, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if ((mask >> i) & 1U) out.push_back(i);
  return out;
}

std::vector<double> column_sums(const StepKernel& W, std::uint64_t mask) {
  const std::size_t n = W.n();
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if ((mask >> i) & 1U)
      for (std::size_t j = 0; j < n; ++j) c[j] += W(i, j);
  return c;
}

struct Best {
  double value = 0.0;
  std::uint64_t mask = 0;
  void offer(double v, std::uint64_t m) {
    if (v > value || (v == value && m < mask)) {
      value = v;
      mask = m;
    }
  }
};

// Gray-code walk over S; reports the best masks for W and for -W.
void enumerate_plus(const StepKernel& W, Best& pos, Best& neg) {
  const std::size_t n = W.n();
  const bool compensated = n > 20;
  std::vector<double> col(n, 0.0), comp(n, 0.0);
  const std::uint64_t total = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t t = 1; t < total; ++t) {
    const int bit = std::countr_zero(t);
    gray ^= std::uint64_t{1} << bit;
    const double sign = ((gray >> bit) & 1U) ? 1.0 : -1.0;
    const auto row = W.values().subspan(static_cast<std::size_t>(bit) * n, n);
    if (compensated) {
      for (std::size_t j = 0; j < n; ++j) {
        const double y = sign * row[j] - comp[j];
        const double s = col[j] + y;
        comp[j] = (s - col[j]) - y;
        col[j] = s;
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) col[j] += sign * row[j];
    }
    double p = 0.0, q = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = col[j];
      if (c > 0.0) p += c;
      else q -= c;
    }
    pos.offer(p, gray);
    neg.offer(q, gray);
  }
}

CutNormResult finish_plus(const StepKernel& W, std::uint64_t mask, double sign,
                          CutAlgorithm method) {
  const std::size_t n = W.n();
  CutNormResult r;
  r.method = method;
  r.one_sided = true;
  const std::vector<double> c = column_sums(W, mask);
  for (std::size_t j = 0; j < n; ++j)
    if (sign * c[j] > 0.0) r.T.push_back(j);
  if (r.T.empty()) return r;
  r.S = mask_indices(mask, n);
  r.value = std::max(0.0, sign * rectangle_sum(W, r.S, r.T)) / static_cast<double>(n * n);
  return r;
}

// Local search on the effective matrix sign * W from the initial row set S.
struct Local {
  double value = 0.0;
  std::vector<char> S, T;
};

Local alternate(const StepKernel& W, double sign, std::vector<char> S) {
  const std::size_t n = W.n();
  std::vector<double> c(n), r(n);
  std::vector<char> T(n, 0);
  auto best_T = [&] {
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (S[i])
        for (std::size_t j = 0; j < n; ++j) c[j] += sign * W(i, j);
    for (std::size_t j = 0; j < n; ++j) T[j] = c[j] > 0.0;
  };
  const std::size_t cap = 10 * n;
  best_T();
  for (std::size_t sweep = 0; sweep < cap; ++sweep) {
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (T[j]) r[i] += sign * W(i, j);
    std::vector<char> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = r[i] > 0.0;
    if (next == S) break;
    S = std::move(next);
    best_T();
  }
  Local out;
  for (std::size_t j = 0; j < n; ++j)
    if (T[j]) out.value += c[j];
  out.S = std::move(S);
  out.T = std::move(T);
  return out;
}

std::vector<std::size_t> indices_of(const std::vector<char>& set) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set[i]) out.push_back(i);
  return out;
}

}  // namespace

std::string_view to_string(CutAlgorithm a) {
  switch (a) {
    case CutAlgorithm::Exact: return "exact";
    case CutAlgorithm::Heuristic: return "heuristic";
    case CutAlgorithm::Oracle: return "oracle";
    case CutAlgorithm::NonnegClosedForm: return "nonneg-closed-form";
  }
  return "?";
}

CutNormResult cut_norm_plus_exact(const StepKernel& W) {
  guard(W, kExactCutLimit, "exact cut norm");
  Best pos, neg;
  enumerate_plus(W, pos, neg);
  return finish_plus(W, pos.mask, 1.0, CutAlgorithm::Exact);
}

CutNormResult cut_norm_exact(const StepKernel& W) {
  guard(W, kExactCutLimit, "exact cut norm");
  Best pos, neg;
  enumerate_plus(W, pos, neg);
  CutNormResult a = finish_plus(W, pos.mask, 1.0, CutAlgorithm::Exact);
  CutNormResult b = finish_plus(W, neg.mask, -1.0, CutAlgorithm::Exact);
  CutNormResult& r = b.value > a.value ? b : a;
  r.one_sided = false;
  return r;
}

CutNormResult matrix_cut_norm_oracle(const StepKernel& W) {
  guard(W, kOracleCutLimit, "cut norm oracle");
  const std::size_t n = W.n();
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<double> col(n, 0.0);
  double best = 0.0;
  std::uint64_t best_s = 0, best_t = 0;
  std::uint64_t gs = 0;
  for (std::uint64_t s = 0; s < total; ++s) {
    if (s > 0) {
      const int bit = std::countr_zero(s);
      gs ^= std::uint64_t{1} << bit;
      const double sign = ((gs >> bit) & 1U) ? 1.0 : -1.0;
      for (std::size_t j = 0; j < n; ++j) col[j] += sign * W(bit, j);
    }
    double acc = 0.0;
    std::uint64_t gt = 0;
    for (std::uint64_t t = 1; t < total; ++t) {
      const int bit = std::countr_zero(t);
      gt ^= std::uint64_t{1} << bit;
      acc += ((gt >> bit) & 1U) ? col[bit] : -col[bit];
      const double v = std::abs(acc);
      if (v > best || (v == best && (gs < best_s || (gs == best_s && gt < best_t)))) {
        best = v;
        best_s = gs;
        best_t = gt;
      }
    }
  }
  CutNormResult r;
  r.method = CutAlgorithm::Oracle;
  if (best == 0.0) return r;
  r.S = mask_indices(best_s, n);
  r.T = mask_indices(best_t, n);
  r.value = std::abs(rectangle_sum(W, r.S, r.T)) / static_cast<double>(n * n);
  return r;
}

CutNormResult cut_norm_heuristic(const StepKernel& W, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw ParameterError("heuristic needs restarts >= 1");
  const std::size_t n = W.n();
  std::vector<std::vector<char>> starts;
  starts.emplace_back(n, 1);
  {
    std::size_t arg = 0;
    double top = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += W(i, j);
      if (std::abs(s) > top) {
        top = std::abs(s);
        arg = i;
      }
    }
    std::vector<char> one(n, 0);
    one[arg] = 1;
    starts.push_back(std::move(one));
  }
  Stream rng(seed);
  for (int r = 0; r < restarts; ++r) {
    std::vector<char> s(n);
    for (auto& b : s) b = rng.coin();
    starts.push_back(std::move(s));
  }

  CutNormResult out;
  out.method = CutAlgorithm::Heuristic;
  double best = 0.0;
  for (double sign : {1.0, -1.0})
    for (const auto& s0 : starts) {
      Local l = alternate(W, sign, s0);
      if (l.value > best) {
        best = l.value;
        out.S = indices_of(l.S);
        out.T = indices_of(l.T);
      }
    }
  if (best > 0.0)
    out.value = std::abs(rectangle_sum(W, out.S, out.T)) / static_cast<double>(n * n);
  return out;
}

CutNormResult cut_norm_auto(const StepKernel& W, int restarts, std::uint64_t seed) {
  const std::size_t n = W.n();
  const bool nonneg = W.nonnegative();
  if (nonneg || W.nonpositive()) {
    CutNormResult r;
    r.method = CutAlgorithm::NonnegClosedForm;
    r.value = std::abs(W.grand_sum()) / static_cast<double>(n * n);
    if (r.value > 0.0) {
      for (std::size_t i = 0; i < n; ++i) r.S.push_back(i);
      r.T = r.S;
    }
    return r;
  }
  if (n <= kExactCutLimit) return cut_norm_exact(W);
  return cut_norm_heuristic(W, restarts, seed);
}

double rectangle_sum(const StepKernel& W, std::span<const std::size_t> S,
                     std::span<const std::size_t> T) {
  double s = 0.0;
  for (std::size_t i : S)
    for (std::size_t j : T) s += W(i, j);
  return s;
}

std::vector<Interval> normalize_intervals(std::span<const Interval> u) {
  std::vector<Interval> v;
  for (const Interval& iv : u) {
    if (!(iv.lo >= 0.0 && iv.hi <= 1.0)) throw DomainError("interval endpoint outside [0,1]");
    if (iv.lo > iv.hi) throw DomainError("reversed interval endpoints");
    if (iv.lo < iv.hi) v.push_back(iv);
  }
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& iv : v) {
    if (!merged.empty() && iv.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    else
      merged.push_back(iv);
  }
  return merged;
}

namespace {

std::vector<double> block_measures(std::span<const Interval> u, std::size_t n) {
  std::vector<double> m(n, 0.0);
  const double h = 1.0 / static_cast<double>(n);
  for (const Interval& iv : normalize_intervals(u)) {
    const std::size_t first = std::min(n - 1, static_cast<std::size_t>(iv.lo * n));
    for (std::size_t b = first; b < n; ++b) {
      const double lo = static_cast<double>(b) * h, hi = static_cast<double>(b + 1) * h;
      if (lo >= iv.hi) break;
      m[b] += std::max(0.0, std::min(hi, iv.hi) - std::max(lo, iv.lo));
    }
  }
  return m;
}

}  // namespace

double step_restriction_value(const StepKernel& W, std::span<const Interval> S,
                              std::span<const Interval> T) {
  const std::size_t n = W.n();
  const std::vector<double> a = block_measures(S, n), b = block_measures(T, n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += W(i, j) * b[j];
    s += a[i] * row;
  }
  return s;
}

}  // namespace cutlab
