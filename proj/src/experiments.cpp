#include "cutlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/rng.hpp"
#include "cutlab/stats.hpp"
#include "cutlab/truncate.hpp"
#include "cutlab/vkernel.hpp"

namespace cutlab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kWilsonZ = 3.0;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Runs fn(i) for i in [0, n) on a bounded pool; results land in index order.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, int workers, Fn fn) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const std::size_t w = std::min<std::size_t>(std::max(workers, 1), std::max<std::size_t>(n, 1));
  if (w <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

struct Task {
  std::size_t k_index;
  std::size_t k;
  std::size_t trial;
};

std::vector<Task> grid_tasks(const ExperimentConfig& cfg) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i)
    for (int t = 0; t < cfg.trials; ++t)
      tasks.push_back({i, cfg.k_grid[i], static_cast<std::size_t>(t)});
  return tasks;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::size_t k, std::size_t t) {
  return derive_seed(cfg.master_seed, to_string(cfg.experiment), k, t);
}

struct SampleNorm {
  double value;
  const char* method;
};

// ||U_X||_box: the off-diagonal mean for nonnegative kernels (O(k) for the
// power families), exact enumeration otherwise.
SampleNorm sample_cut_norm(const KernelSpec& U, const SamplePoints& X) {
  const double kk = static_cast<double>(X.coords.size() * X.coords.size());
  if (U.nonnegative()) return {sample_offdiag_sum(U, X) / kk, "nonneg-closed-form"};
  if (X.coords.size() > kSignedSampleLimit)
    throw ConfigError("signed kernels need exact sample cut norms, k <= " +
                      std::to_string(kSignedSampleLimit));
  return {cut_norm_exact(sample_kernel(U, X)).value, "exact"};
}

void require_signed_limit(const ExperimentConfig& cfg) {
  if (cfg.kernel.nonnegative()) return;
  for (std::size_t k : cfg.k_grid)
    if (k > kSignedSampleLimit)
      throw ConfigError("signed kernels need exact sample cut norms: k_grid entries must be <= " +
                        std::to_string(kSignedSampleLimit));
}

Json bound_json(const BoundValue& b) {
  Json terms = Json::object();
  for (const auto& [name, v] : b.terms) terms[name] = v;
  Json j = {{"value", b.value}, {"terms", terms}};
  if (!std::isnan(b.probability)) {
    j["probability_raw"] = b.probability;
    j["exceptional_clamped"] = clamp01(1.0 - b.probability);
  }
  if (!std::isnan(b.probability_alt)) {
    j["probability_alt_raw"] = b.probability_alt;
    j["exceptional_alt_clamped"] = clamp01(1.0 - b.probability_alt);
  }
  return j;
}

struct Campaign {
  std::vector<TrialRecord> records;
  std::vector<CheckResult> checks;
  Json theory = Json::array();
  std::vector<std::string> flags;
};

std::size_t count_aux(const std::vector<TrialRecord>& recs, std::size_t k, const std::string& key) {
  std::size_t c = 0;
  for (const auto& r : recs)
    if (r.k == k) {
      auto it = r.aux.find(key);
      if (it != r.aux.end() && it->second != 0.0) ++c;
    }
  return c;
}

std::size_t count_k(const std::vector<TrialRecord>& recs, std::size_t k) {
  return static_cast<std::size_t>(
      std::count_if(recs.begin(), recs.end(), [&](const TrialRecord& r) { return r.k == k; }));
}

// Passes when the Wilson interval of the empirical rate reaches down to the
// clamped exceptional probability.
CheckResult rate_check(const std::string& name, std::size_t k, std::size_t hits, std::size_t n,
                       double exceptional) {
  const Interval01 w = wilson_interval(hits, n, kWilsonZ);
  CheckResult c{name, k, w.lo <= clamp01(exceptional), ""};
  c.detail = std::to_string(hits) + "/" + std::to_string(n) + " violations, allowed rate " +
             g17(clamp01(exceptional)) + " (raw " + g17(exceptional) + ")";
  return c;
}

CheckResult zero_check(const std::string& name, std::size_t k, std::size_t hits, std::size_t n) {
  return {name, k, hits == 0, std::to_string(hits) + "/" + std::to_string(n) + " failures"};
}

template <typename Fn>
std::vector<TrialRecord> run_grid(const ExperimentConfig& cfg, Fn fn) {
  const std::vector<Task> tasks = grid_tasks(cfg);
  return parallel_map<TrialRecord>(tasks.size(), effective_workers(cfg.workers), [&](std::size_t i) {
    const Task& t = tasks[i];
    TrialRecord r;
    r.k = t.k;
    r.trial_index = t.trial;
    r.seed = trial_seed(cfg, t.k, t.trial);
    fn(t, r);
    return r;
  });
}

// ---------------------------------------------------------------------------

Campaign first_lemma(const ExperimentConfig& cfg) {
  require_signed_limit(cfg);
  const KernelSpec& U = cfg.kernel;
  const KernelNorms norms = kernel_norms(U, cfg.params.p);
  const double ref = cut_norm_reference(U).value;
  std::vector<BoundValue> up, lo;
  for (std::size_t k : cfg.k_grid) {
    up.push_back(theorem_bound(BoundId::FirstUpper, norms, cfg.params, k));
    lo.push_back(theorem_bound(BoundId::FirstLower, norms, cfg.params, k));
  }
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    const SampleNorm s = sample_cut_norm(U, draw_points(t.k, r.seed));
    r.sample_cut_norm = s.value;
    r.method = s.method;
    r.reference_cut_norm = ref;
    r.deviation = s.value - ref;
    r.bound_rhs = up[t.k_index].value;
    const bool uv = r.deviation > up[t.k_index].value;
    const bool lv = r.deviation < lo[t.k_index].value;
    r.aux = {{"lower_rhs", lo[t.k_index].value},
             {"upper_rhs", up[t.k_index].value},
             {"upper_violated", uv ? 1.0 : 0.0},
             {"lower_violated", lv ? 1.0 : 0.0}};
    r.violated = uv || lv;
  });
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
    const std::size_t k = cfg.k_grid[i], n = count_k(c.records, k);
    c.checks.push_back(rate_check("first_upper_rate", k, count_aux(c.records, k, "upper_violated"), n,
                                  1.0 - up[i].probability));
    c.checks.push_back(rate_check("first_lower_rate", k, count_aux(c.records, k, "lower_violated"), n,
                                  1.0 - lo[i].probability));
    c.theory.push_back({{"k", k}, {"upper", bound_json(up[i])}, {"lower", bound_json(lo[i])}});
  }
  c.flags.push_back("bounds are keyed by direction (upper/lower), not by item number");
  return c;
}

Campaign systematic_error(const ExperimentConfig& cfg) {
  require_signed_limit(cfg);
  const KernelSpec& U = cfg.kernel;
  const KernelNorms norms = kernel_norms(U, cfg.params.p);
  const double ref = cut_norm_reference(U).value;
  const bool have_l2 = std::isfinite(norms.l2);
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    const SamplePoints X = draw_points(t.k, r.seed);
    const SampleNorm s = sample_cut_norm(U, X);
    r.sample_cut_norm = s.value;
    r.method = s.method;
    r.reference_cut_norm = ref;
    r.deviation = s.value - ref;
    r.bound_rhs = theorem_bound(BoundId::SystematicUpper, norms, cfg.params, t.k).value;
    if (have_l2) r.aux["frobenius_sq"] = sample_offdiag_sq_sum(U, X) / static_cast<double>(t.k * t.k);
  });
  const Json agg = aggregate_records(c.records);
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
    const std::size_t k = cfg.k_grid[i];
    const Json& a = agg[i];
    const double mean = a["mean"].get<double>(), se = a["stderr"].get<double>();
    const double kd = static_cast<double>(k);
    const double target = (kd - 1.0) / kd * ref;
    const double tol = 1e-12 * std::max(1.0, std::abs(target));
    CheckResult lower{"systematic_lower", k, true, ""};
    if (U.nonnegative()) {
      // E||U_X|| is exactly ((k-1)/k)||U||_1 here.
      const double z = se > 0.0 ? (mean - target) / se : 0.0;
      lower.passed = std::abs(mean - target) <= 4.0 * se + tol;
      lower.detail = "mean " + g17(mean) + ", target " + g17(target) + ", z " + g17(z);
    } else {
      lower.passed = mean >= target - 3.0 * se - tol;
      lower.detail = "mean " + g17(mean) + " >= " + g17(target) + " - 3 se";
    }
    c.checks.push_back(lower);
    const BoundValue upper = theorem_bound(BoundId::SystematicUpper, norms, cfg.params, k);
    const BoundValue sys_lo = theorem_bound(BoundId::SystematicLower, norms, cfg.params, k);
    const double excess = mean - ref;
    c.checks.push_back({"systematic_upper", k, excess <= upper.value,
                        "mean - ||U|| = " + g17(excess) + ", bound " + g17(upper.value) +
                            (excess > 0 ? ", slack factor " + g17(upper.value / excess)
                                        : std::string(", mean below ||U||"))});
    Json th = {{"k", k},
               {"upper", bound_json(upper)},
               {"lower", bound_json(sys_lo)},
               {"lower_target", target}};
    if (have_l2) {
      const double ftarget = (kd - 1.0) / kd * norms.l2 * norms.l2;
      const double fm = a["aux_means"]["frobenius_sq"].get<double>();
      std::vector<double> v;
      for (const auto& r : c.records)
        if (r.k == k) v.push_back(r.aux.at("frobenius_sq"));
      const MeanStats ms = mean_stats(v);
      const double ftol = 1e-12 * std::max(1.0, ftarget);
      const bool ok = std::abs(fm - ftarget) <= 4.0 * ms.stderr_ + ftol;
      c.checks.push_back({"frobenius_identity", k, ok,
                          "mean " + g17(fm) + ", target " + g17(ftarget) + ", stderr " +
                              g17(ms.stderr_)});
      th["frobenius_target"] = ftarget;
    }
    c.theory.push_back(th);
  }
  return c;
}

Campaign dispersion(const ExperimentConfig& cfg) {
  require_signed_limit(cfg);
  const KernelSpec& U = cfg.kernel;
  const double ref = cut_norm_reference(U).value;
  const int workers = effective_workers(cfg.workers);
  std::vector<MeanStats> means;
  std::vector<TailBound> tails;
  for (std::size_t k : cfg.k_grid) {
    // Independent batch for E||U_X||; never reused for counting.
    const auto vals = parallel_map<double>(static_cast<std::size_t>(cfg.mean_trials), workers,
                                           [&](std::size_t t) {
                                             const auto s = derive_seed(cfg.master_seed, "dispersion-mean", k, t);
                                             return sample_cut_norm(U, draw_points(k, s)).value;
                                           });
    means.push_back(mean_stats(vals));
    tails.push_back(dispersion_tail_bound(U, cfg.params, k));
  }
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    const SampleNorm s = sample_cut_norm(U, draw_points(t.k, r.seed));
    const MeanStats& m = means[t.k_index];
    const double threshold = tails[t.k_index].threshold + 3.0 * m.stderr_;
    r.sample_cut_norm = s.value;
    r.method = s.method;
    r.reference_cut_norm = m.mean;
    r.deviation = s.value - m.mean;
    r.bound_rhs = threshold;
    r.violated = std::abs(r.deviation) >= threshold;
    r.aux = {{"cut_norm_limit", ref}, {"mean_stderr", m.stderr_}};
  });
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
    const std::size_t k = cfg.k_grid[i];
    std::size_t hits = 0;
    for (const auto& r : c.records) hits += (r.k == k && r.violated);
    c.checks.push_back(rate_check("dispersion_rate", k, hits, count_k(c.records, k), tails[i].prob));
    c.theory.push_back({{"k", k},
                        {"threshold", tails[i].threshold},
                        {"probability_bound_raw", tails[i].prob},
                        {"probability_bound_clamped", clamp01(tails[i].prob)},
                        {"alpha", azuma_alpha(U, k, cfg.params.nu, cfg.params.gamma)},
                        {"mean_estimate", means[i].mean},
                        {"mean_stderr", means[i].stderr_},
                        {"mean_trials", cfg.mean_trials}});
  }
  return c;
}

Campaign l0(const ExperimentConfig& cfg) {
  const KernelSpec& U = cfg.kernel;
  const double l1 = lp_norm(U, 1.0).value;
  const auto& prm = cfg.params;
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    const DeltaReport d = delta_U(U, draw_points(t.k, r.seed), prm.nu, prm.gamma);
    r.sample_cut_norm = d.delta_value;
    r.method = "delta";
    r.reference_cut_norm = 0.0;
    r.deviation = d.delta_value;
    r.bound_rhs = prm.nu * std::pow(static_cast<double>(t.k), prm.gamma) * l1;
    r.violated = !d.in_L0;
    r.aux = {{"max_section_deviation", *std::max_element(d.per_j_section.begin(), d.per_j_section.end())},
             {"max_average_deviation", *std::max_element(d.per_j_average.begin(), d.per_j_average.end())}};
  });
  for (std::size_t k : cfg.k_grid) {
    const double bound = l0_probability_bound(U, prm.p, prm.nu, prm.gamma, k);
    std::size_t hits = 0;
    for (const auto& r : c.records) hits += (r.k == k && r.violated);
    c.checks.push_back(rate_check("l0_membership_rate", k, hits, count_k(c.records, k), 1.0 - bound));
    c.theory.push_back({{"k", k}, {"membership_probability_bound_raw", bound},
                        {"exceptional_clamped", clamp01(1.0 - bound)}});
  }
  return c;
}

std::string qkey(const char* base, int q, const char* field) {
  return std::string(base) + "_q" + std::to_string(q) + "_" + field;
}

Campaign appendix(const ExperimentConfig& cfg) {
  const KernelSpec& U = cfg.kernel;
  for (std::size_t k : cfg.k_grid)
    if (k > kExactCutLimit) throw ConfigError("appendix campaign needs k <= 30");
  double ref = kNaN;
  try {
    ref = cut_norm_reference(U).value;
  } catch (const UnsupportedError&) {
  }
  const std::vector<int> qs = cfg.q_grid.empty() ? std::vector<int>{cfg.params.q} : cfg.q_grid;
  auto bplus_feasible = [&](std::size_t k, int q) {
    if (k > 14 || q < 1 || static_cast<std::size_t>(q) > k) return false;
    double b = 1.0;
    for (int i = 1; i <= q; ++i) b = b * static_cast<double>(k - q + i) / i;
    return b * b <= kExactSubsetBudget;
  };
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    const StepKernel W = sample_kernel(U, draw_points(t.k, r.seed));
    Stream rng(derive_seed(r.seed, "sets"));
    IndexSet R1, R2;
    for (std::size_t i = 0; i < t.k; ++i) {
      if (rng.coin()) R1.push_back(i);
      if (rng.coin()) R2.push_back(i);
    }
    r.sample_cut_norm = cut_norm_exact(W).value;
    r.method = "exact";
    r.reference_cut_norm = ref;
    r.deviation = r.sample_cut_norm - ref;
    r.bound_rhs = kNaN;
    for (int q : qs) {
      const SubsampleCheck b = bs12_check(W, R1, R2, static_cast<std::size_t>(q), r.seed);
      r.aux[qkey("bs12", q, "lhs")] = b.lhs;
      r.aux[qkey("bs12", q, "rhs")] = b.rhs;
      r.aux[qkey("bs12", q, "exact")] = b.exact ? 1.0 : 0.0;
      r.aux[qkey("bs12", q, "violated")] = (!b.holds && b.exact) ? 1.0 : 0.0;
      r.violated = r.violated || (!b.holds && b.exact);
      if (static_cast<int>(t.trial) < cfg.bplus_trials && bplus_feasible(t.k, q)) {
        const SubsampleCheck p = bplus_upper_check(W, static_cast<std::size_t>(q));
        r.aux[qkey("bplus", q, "lhs")] = p.lhs;
        r.aux[qkey("bplus", q, "rhs")] = p.rhs;
        r.aux[qkey("bplus", q, "violated")] = p.holds ? 0.0 : 1.0;
        r.violated = r.violated || !p.holds;
      }
    }
  });
  for (std::size_t k : cfg.k_grid) {
    Json th = {{"k", k}, {"q", qs}};
    for (int q : qs) {
      std::size_t nb = 0, np = 0;
      for (const auto& r : c.records)
        if (r.k == k) {
          nb += r.aux.at(qkey("bs12", q, "exact")) != 0.0;
          np += r.aux.count(qkey("bplus", q, "lhs"));
        }
      c.checks.push_back(zero_check("bs12_q" + std::to_string(q), k,
                                    count_aux(c.records, k, qkey("bs12", q, "violated")), nb));
      if (np > 0)
        c.checks.push_back(zero_check("bplus_q" + std::to_string(q), k,
                                      count_aux(c.records, k, qkey("bplus", q, "violated")), np));
      th["bs12_exact_instances_q" + std::to_string(q)] = nb;
      th["bplus_instances_q" + std::to_string(q)] = np;
    }
    c.theory.push_back(th);
  }
  return c;
}

Campaign vector_campaign(const ExperimentConfig& cfg) {
  if (cfg.vector_components.empty()) throw ConfigError("vector campaign needs 'vector_components'");
  const VectorKernelSpec U(cfg.vector_components);
  const std::size_t d = U.d();
  for (std::size_t k : cfg.k_grid)
    if (k > kExactCutLimit) throw ConfigError("vector campaign needs k <= 30");
  VectorNorms vn{U.l1_norm(), U.lp_norm(cfg.params.p), kNaN};
  bool have_cut = true;
  try {
    vn.cut = U.cut_norm();
  } catch (const UnsupportedError&) {
    have_cut = false;
  }
  const EpsilonNet net = build_epsilon_net(d, cfg.epsilon);
  std::vector<VectorBounds> bounds;
  for (std::size_t k : cfg.k_grid) bounds.push_back(vector_theorem_bounds(vn, cfg.params, k, d));
  const double eps = cfg.epsilon;
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    const VectorStepKernel W = sample_vector_kernel(U, draw_points(t.k, r.seed));
    const double exact = vector_cut_norm_exact(W).value;
    const double netv = vector_cut_norm_net(W, net);
    const double tol = 1e-12 * std::max(1.0, exact);
    const bool sandwich = netv > exact + tol || exact > netv / (1.0 - eps) + tol;
    const VectorBounds& b = bounds[t.k_index];
    r.sample_cut_norm = exact;
    r.method = "vertex-enumeration";
    r.reference_cut_norm = vn.cut;
    r.deviation = exact - vn.cut;
    r.bound_rhs = b.upper_rhs;
    const bool lv = have_cut && r.deviation < b.lower_rhs;
    const bool uv = have_cut && r.deviation > b.upper_rhs;
    r.aux = {{"net_value", netv},
             {"sandwich_violated", sandwich ? 1.0 : 0.0},
             {"lower_rhs", b.lower_rhs},
             {"lower_violated", lv ? 1.0 : 0.0},
             {"upper_violated", uv ? 1.0 : 0.0}};
    r.violated = sandwich || lv || uv;
  });
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
    const std::size_t k = cfg.k_grid[i], n = count_k(c.records, k);
    c.checks.push_back(zero_check("vector_sandwich", k, count_aux(c.records, k, "sandwich_violated"), n));
    if (have_cut) {
      c.checks.push_back(rate_check("vector_lower_rate", k, count_aux(c.records, k, "lower_violated"),
                                    n, 1.0 - bounds[i].lower_prob));
      c.checks.push_back(rate_check("vector_upper_rate", k, count_aux(c.records, k, "upper_violated"),
                                    n, 1.0 - bounds[i].upper_prob));
    }
    c.theory.push_back({{"k", k},
                        {"lower_rhs", bounds[i].lower_rhs},
                        {"upper_rhs", bounds[i].upper_rhs},
                        {"lower_probability_raw", bounds[i].lower_prob},
                        {"upper_probability_raw", bounds[i].upper_prob},
                        {"upper_epsilon", bounds[i].epsilon}});
  }
  Json norms = {{"l1", vn.l1}, {"lp", vn.lp}, {"cut", have_cut ? Json(vn.cut) : Json(nullptr)}};
  c.theory.push_back({{"net_size", net.points.size()},
                      {"net_reference_size", net.reference_size},
                      {"epsilon", eps},
                      {"norms", norms}});
  if (!have_cut) c.flags.push_back("vector cut norm has no closed form here; theorem rates skipped");
  return c;
}

Campaign truncation(const ExperimentConfig& cfg) {
  const KernelSpec& U = cfg.kernel;
  const double p = cfg.params.p;
  const double l1 = lp_norm(U, 1.0).value, lp = lp_norm(U, p).value;
  if (!(8.0 * lp > l1)) throw ConfigError("truncation grid (||U||_1, 8||U||_p] is empty");
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    const double f = l1 + (8.0 * lp - l1) * static_cast<double>(t.trial + 1) / cfg.trials;
    const double tail = truncation_tail_mass(U, f);
    const double quad = truncation_tail_mass_quadrature(U, f);
    const double bound = truncation_l1_error_bound(U, p, f);
    r.sample_cut_norm = tail;
    r.method = "tail-mass";
    r.reference_cut_norm = quad;
    r.deviation = tail - quad;
    r.bound_rhs = bound;
    const bool disagree = std::abs(tail - quad) > 1e-6 * std::max(1.0, std::abs(tail));
    const bool over = tail > bound;
    r.aux = {{"f", f},
             {"clamp_error", truncation_l1_error_exact(U, f)},
             {"routes_disagree", disagree ? 1.0 : 0.0},
             {"bound_violated", over ? 1.0 : 0.0}};
    r.violated = disagree || over;
  });
  for (std::size_t k : cfg.k_grid) {
    const std::size_t n = count_k(c.records, k);
    c.checks.push_back(zero_check("truncation_bound", k, count_aux(c.records, k, "bound_violated"), n));
    c.checks.push_back(zero_check("truncation_routes", k, count_aux(c.records, k, "routes_disagree"), n));
    const double f1 = first_lemma_threshold(U, p, k);
    Json th = {{"k", k}, {"first_lemma_threshold", f1}};
    if (f1 > l1) {
      th["tail_mass_at_threshold"] = truncation_tail_mass(U, f1);
      th["bound_at_threshold"] = truncation_l1_error_bound(U, p, f1);
    }
    c.theory.push_back(th);
  }
  return c;
}

struct DistanceEval {
  double total;
  CutDistanceEstimate est;
  double charge;
};

DistanceEval distance_to_sample(const Discretization& disc, const KernelSpec& U,
                                const SamplePoints& X, const AnnealConfig& anneal,
                                std::uint64_t seed) {
  const StepKernel W = sample_kernel(U, X);
  CutDistanceEstimate e = cut_distance_upper(disc.kernel, W, anneal, derive_seed(seed, "anneal"));
  return {e.upper + disc.l1_error_bound, std::move(e), disc.l1_error_bound};
}

void fill_distance(TrialRecord& r, const DistanceEval& d, double bound) {
  r.sample_cut_norm = d.total;
  r.method = std::string(to_string(d.est.method)) + (d.est.estimate_exact ? "+exact" : "+certified");
  r.reference_cut_norm = 0.0;
  r.deviation = d.total;
  r.bound_rhs = bound;
  r.violated = !(d.total <= bound);
  r.aux = {{"delta_upper", d.est.upper},
           {"delta_estimate", d.est.estimate},
           {"delta_lower", d.est.lower},
           {"discretization_charge", d.charge},
           {"blowup_size", static_cast<double>(d.est.blowup_size)}};
}

std::vector<Discretization> discretizations(const ExperimentConfig& cfg) {
  std::vector<Discretization> out;
  for (std::size_t k : cfg.k_grid) {
    const int m = cfg.discretization > 0 ? cfg.discretization : static_cast<int>(k);
    out.push_back(discretize_kernel(cfg.kernel, m));
  }
  return out;
}

// Median trend across the grid: one inversion is tolerated (flagged).
void trend_check(Campaign& c, const ExperimentConfig& cfg, const Json& agg) {
  int inversions = 0;
  for (std::size_t i = 1; i < cfg.k_grid.size(); ++i)
    if (agg[i]["median"].get<double>() > agg[i - 1]["median"].get<double>()) ++inversions;
  c.checks.push_back({"median_trend", 0, inversions <= 1,
                      std::to_string(inversions) + " inversion(s) of the median across k"});
  if (inversions == 1) c.flags.push_back("median distance increased once across the k grid (noise)");
}

const char* kProbabilityFlag =
    "the cut distance statement has two readings of the exceptional probability: "
    "3k^-(phi p) (used for checks) and 3k^-phi (reported as probability_alt)";

Campaign second_lemma(const ExperimentConfig& cfg) {
  const KernelSpec& U = cfg.kernel;
  if (!U.nonnegative()) throw ConfigError("second-lemma campaign needs a nonnegative kernel");
  const KernelNorms norms = kernel_norms(U, cfg.params.p);
  std::vector<BoundValue> bounds;
  for (std::size_t k : cfg.k_grid)
    bounds.push_back(theorem_bound(BoundId::SecondLemma, norms, cfg.params, k));
  const std::vector<Discretization> disc = discretizations(cfg);
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    const DistanceEval d =
        distance_to_sample(disc[t.k_index], U, draw_points(t.k, r.seed), cfg.anneal, r.seed);
    fill_distance(r, d, bounds[t.k_index].value);
  });
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
    const std::size_t k = cfg.k_grid[i];
    std::size_t hits = 0;
    for (const auto& r : c.records) hits += (r.k == k && r.violated);
    c.checks.push_back(zero_check("second_lemma_bound", k, hits, count_k(c.records, k)));
    Json th = {{"k", k}, {"bound", bound_json(bounds[i])}};
    th["discretization_m"] = disc[i].kernel.n();
    th["discretization_charge"] = disc[i].l1_error_bound;
    c.theory.push_back(th);
  }
  trend_check(c, cfg, aggregate_records(c.records));
  c.flags.push_back(kProbabilityFlag);
  return c;
}

Campaign almost_sure(const ExperimentConfig& cfg) {
  const KernelSpec& U = cfg.kernel;
  if (!U.nonnegative()) throw ConfigError("almost-sure campaign needs a nonnegative kernel");
  const KernelNorms norms = kernel_norms(U, cfg.params.p);
  std::vector<BoundValue> bounds;
  for (std::size_t k : cfg.k_grid)
    bounds.push_back(theorem_bound(BoundId::SecondLemma, norms, cfg.params, k));
  const std::vector<Discretization> disc = discretizations(cfg);
  const std::size_t kmax = cfg.k_grid.back();
  Campaign c;
  c.records = run_grid(cfg, [&](const Task& t, TrialRecord& r) {
    SamplePoints X;
    if (cfg.nested) {
      // One trajectory per trial; each k uses a prefix of the same stream.
      r.seed = derive_seed(cfg.master_seed, "almost-sure-trajectory", t.trial);
      X = draw_points(kmax, r.seed);
      X.coords.resize(t.k);
      X.k = t.k;
    } else {
      X = draw_points(t.k, r.seed);
    }
    const DistanceEval d = distance_to_sample(disc[t.k_index], U, X, cfg.anneal,
                                              derive_seed(r.seed, "k", t.k));
    fill_distance(r, d, bounds[t.k_index].value);
  });
  const std::size_t half = cfg.k_grid.size() / 2;
  for (int t = 0; t < cfg.trials; ++t) {
    bool finite = true, ok = true;
    double running = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
      const TrialRecord& r = c.records[i * cfg.trials + t];
      finite = finite && std::isfinite(r.sample_cut_norm);
      if (i < half) continue;
      running = std::max(running, r.sample_cut_norm);
      if (!(running <= bounds[i].value)) {
        ok = false;
        detail += "k=" + std::to_string(r.k) + " running max " + g17(running) + " > " +
                  g17(bounds[i].value) + "; ";
      }
    }
    c.checks.push_back({"trajectory_finite_t" + std::to_string(t), 0, finite, ""});
    c.checks.push_back({"trajectory_running_max_t" + std::to_string(t), 0, ok,
                        ok ? "running maximum over the upper half of the grid below the bound" : detail});
  }
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i)
    c.theory.push_back({{"k", cfg.k_grid[i]}, {"bound", bound_json(bounds[i])},
                        {"discretization_charge", disc[i].l1_error_bound}});
  c.flags.push_back(cfg.nested ? "nested coordinates: each k extends the previous sample"
                               : "independent samples per k");
  c.flags.push_back(kProbabilityFlag);
  return c;
}

// ---------------------------------------------------------------------------

const std::set<std::string> kTopKeys = {
    "experiment", "kernel", "k_grid", "p", "params", "trials", "master_seed", "workers",
    "output_dir", "vector_components", "epsilon", "q_grid", "bplus_trials", "mean_trials",
    "anneal", "discretization", "mode"};

template <typename T>
T get_field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string_view to_string(ExperimentKind e) {
  switch (e) {
    case ExperimentKind::FirstLemma: return "first-lemma";
    case ExperimentKind::SecondLemma: return "second-lemma";
    case ExperimentKind::SystematicError: return "systematic-error";
    case ExperimentKind::Dispersion: return "dispersion";
    case ExperimentKind::L0: return "l0";
    case ExperimentKind::Appendix: return "appendix";
    case ExperimentKind::Vector: return "vector";
    case ExperimentKind::Truncation: return "truncation";
    case ExperimentKind::AlmostSure: return "almost-sure";
  }
  return "?";
}

ExperimentKind experiment_from_string(std::string_view s) {
  for (auto e : {ExperimentKind::FirstLemma, ExperimentKind::SecondLemma,
                 ExperimentKind::SystematicError, ExperimentKind::Dispersion, ExperimentKind::L0,
                 ExperimentKind::Appendix, ExperimentKind::Vector, ExperimentKind::Truncation,
                 ExperimentKind::AlmostSure})
    if (to_string(e) == s) return e;
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kTopKeys.count(key)) throw ConfigError("unknown config field '" + key + "'");
  ExperimentConfig c;
  c.raw = j;
  if (!j.contains("experiment")) throw ConfigError("config needs 'experiment'");
  c.experiment = experiment_from_string(get_field<std::string>(j, "experiment", ""));
  try {
    if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"));
    else if (c.experiment != ExperimentKind::Vector) throw ConfigError("config needs 'kernel'");
    if (j.contains("vector_components"))
      for (const Json& k : j.at("vector_components")) c.vector_components.push_back(kernel_from_json(k));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid kernel: ") + e.what());
  }
  if (!j.contains("k_grid")) throw ConfigError("config needs 'k_grid'");
  c.k_grid = get_field<std::vector<std::size_t>>(j, "k_grid", {});
  if (c.k_grid.empty()) throw ConfigError("k_grid must not be empty");
  if (!std::is_sorted(c.k_grid.begin(), c.k_grid.end()) ||
      std::adjacent_find(c.k_grid.begin(), c.k_grid.end()) != c.k_grid.end())
    throw ConfigError("k_grid must be strictly ascending");
  if (c.k_grid.front() < 2) throw ConfigError("k_grid entries must be >= 2");
  c.params.p = get_field<double>(j, "p", 3.0);
  if (j.contains("params")) {
    const Json& p = j.at("params");
    static const std::set<std::string> keys = {"nu", "gamma", "phi", "lambda", "q", "p"};
    for (const auto& [key, _] : p.items())
      if (!keys.count(key)) throw ConfigError("unknown params field '" + key + "'");
    c.params.nu = get_field<double>(p, "nu", c.params.nu);
    c.params.gamma = get_field<double>(p, "gamma", c.params.gamma);
    c.params.phi = get_field<double>(p, "phi", c.params.phi);
    c.params.lambda = get_field<double>(p, "lambda", c.params.lambda);
    c.params.q = get_field<int>(p, "q", c.params.q);
    if (p.contains("p")) c.params.p = get_field<double>(p, "p", c.params.p);
  }
  if (!(c.params.p >= 1.0)) throw ConfigError("p must be >= 1");
  c.trials = get_field<int>(j, "trials", c.trials);
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  c.master_seed = get_field<std::uint64_t>(j, "master_seed", 0);
  c.workers = get_field<int>(j, "workers", 1);
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  c.output_dir = get_field<std::string>(j, "output_dir", "out");
  c.epsilon = get_field<double>(j, "epsilon", c.epsilon);
  c.q_grid = get_field<std::vector<int>>(j, "q_grid", {});
  c.bplus_trials = get_field<int>(j, "bplus_trials", c.bplus_trials);
  c.mean_trials = get_field<int>(j, "mean_trials", c.mean_trials);
  if (c.mean_trials < 2) throw ConfigError("mean_trials must be >= 2");
  c.discretization = get_field<int>(j, "discretization", 0);
  if (c.discretization < 0) throw ConfigError("discretization must be >= 0");
  const std::string mode = get_field<std::string>(j, "mode", "nested");
  if (mode != "nested" && mode != "independent")
    throw ConfigError("mode must be 'nested' or 'independent'");
  c.nested = mode == "nested";
  if (j.contains("anneal")) {
    const Json& a = j.at("anneal");
    static const std::set<std::string> keys = {"cooling", "proposals_per_block", "sweeps", "restarts",
                                               "initial_temperature", "objective",
                                               "exact_objective_limit", "heuristic_restarts"};
    for (const auto& [key, _] : a.items())
      if (!keys.count(key)) throw ConfigError("unknown anneal field '" + key + "'");
    c.anneal.cooling = get_field<double>(a, "cooling", c.anneal.cooling);
    c.anneal.proposals_per_block = get_field<int>(a, "proposals_per_block", c.anneal.proposals_per_block);
    c.anneal.sweeps = get_field<int>(a, "sweeps", c.anneal.sweeps);
    c.anneal.restarts = get_field<int>(a, "restarts", c.anneal.restarts);
    c.anneal.initial_temperature = get_field<double>(a, "initial_temperature", 0.0);
    const std::string obj = get_field<std::string>(a, "objective", "frobenius");
    if (obj == "frobenius") c.anneal.objective = AnnealObjective::Frobenius;
    else if (obj == "cut-norm") c.anneal.objective = AnnealObjective::CutNorm;
    else throw ConfigError("anneal.objective must be 'frobenius' or 'cut-norm'");
    c.anneal.exact_objective_limit =
        get_field<std::size_t>(a, "exact_objective_limit", c.anneal.exact_objective_limit);
    c.anneal.heuristic_restarts = get_field<int>(a, "heuristic_restarts", c.anneal.heuristic_restarts);
    if (!(c.anneal.cooling > 0.0 && c.anneal.cooling < 1.0))
      throw ConfigError("anneal.cooling must lie in (0,1)");
    if (c.anneal.proposals_per_block < 1 || c.anneal.sweeps < 1 || c.anneal.restarts < 1)
      throw ConfigError("anneal budgets must be >= 1");
  }
  return c;
}

int effective_workers(int configured) {
  if (const char* env = std::getenv("CUTNORM_LAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return std::max(configured, 1);
}

bool RunResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Campaign c;
  try {
    switch (cfg.experiment) {
      case ExperimentKind::FirstLemma: c = first_lemma(cfg); break;
      case ExperimentKind::SecondLemma: c = second_lemma(cfg); break;
      case ExperimentKind::SystematicError: c = systematic_error(cfg); break;
      case ExperimentKind::Dispersion: c = dispersion(cfg); break;
      case ExperimentKind::L0: c = l0(cfg); break;
      case ExperimentKind::Appendix: c = appendix(cfg); break;
      case ExperimentKind::Vector: c = vector_campaign(cfg); break;
      case ExperimentKind::Truncation: c = truncation(cfg); break;
      case ExperimentKind::AlmostSure: c = almost_sure(cfg); break;
    }
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  } catch (const IntegrabilityError& e) {
    throw ConfigError(e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RunResult r;
  r.records = std::move(c.records);
  r.checks = std::move(c.checks);
  Json checks = Json::array();
  for (const auto& ch : r.checks)
    checks.push_back({{"name", ch.name}, {"k", ch.k}, {"passed", ch.passed}, {"detail", ch.detail}});
  r.report = {{"experiment", std::string(to_string(cfg.experiment))},
              {"config", cfg.raw},
              {"workers", effective_workers(cfg.workers)},
              {"per_k", aggregate_records(r.records)},
              {"theory", std::move(c.theory)},
              {"checks", std::move(checks)},
              {"flags", c.flags},
              {"all_passed", r.all_passed()},
              {"wall_clock_seconds", seconds}};
  return r;
}

// ---------------------------------------------------------------------------

std::string csv_row(std::string_view experiment, const TrialRecord& r) {
  std::string aux;
  for (const auto& [name, v] : r.aux) {  // std::map keeps names sorted
    if (!aux.empty()) aux += ';';
    aux += name + "=" + g17(v);
  }
  std::string row;
  row += experiment;
  row += "," + std::to_string(r.k) + "," + std::to_string(r.trial_index) + "," +
         std::to_string(r.seed) + "," + g17(r.sample_cut_norm) + "," + r.method + "," +
         g17(r.reference_cut_norm) + "," + g17(r.deviation) + "," + g17(r.bound_rhs) + "," +
         (r.violated ? "1" : "0") + "," + aux;
  return row;
}

std::vector<TrialRecord> read_trials_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw ConfigError(path.string() + " does not start with the trials header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw ConfigError("malformed trials row: " + line);
    TrialRecord r;
    r.k = std::stoull(f[1]);
    r.trial_index = std::stoull(f[2]);
    r.seed = std::stoull(f[3]);
    r.sample_cut_norm = std::strtod(f[4].c_str(), nullptr);
    r.method = f[5];
    r.reference_cut_norm = std::strtod(f[6].c_str(), nullptr);
    r.deviation = std::strtod(f[7].c_str(), nullptr);
    r.bound_rhs = std::strtod(f[8].c_str(), nullptr);
    r.violated = f[9] == "1";
    std::stringstream as(f[10]);
    std::string kv;
    while (std::getline(as, kv, ';')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("malformed aux entry: " + kv);
      r.aux[kv.substr(0, eq)] = std::strtod(kv.c_str() + eq + 1, nullptr);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json aggregate_records(const std::vector<TrialRecord>& records) {
  std::vector<std::size_t> ks;
  for (const auto& r : records)
    if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) ks.push_back(r.k);
  std::sort(ks.begin(), ks.end());
  Json out = Json::array();
  for (std::size_t k : ks) {
    std::vector<double> vals, devs;
    std::map<std::string, std::vector<double>> aux;
    std::size_t viol = 0;
    for (const auto& r : records) {
      if (r.k != k) continue;
      vals.push_back(r.sample_cut_norm);
      devs.push_back(r.deviation);
      viol += r.violated;
      for (const auto& [name, v] : r.aux) aux[name].push_back(v);
    }
    const MeanStats m = mean_stats(vals);
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const Interval01 w = wilson_interval(viol, n, 1.96);
    Json aux_means = Json::object();
    for (const auto& [name, v] : aux) aux_means[name] = mean_stats(v).mean;
    out.push_back({{"k", k},
                   {"trials", n},
                   {"mean", m.mean},
                   {"stderr", m.stderr_},
                   {"median", median},
                   {"mean_deviation", mean_stats(devs).mean},
                   {"violations", viol},
                   {"violation_rate", static_cast<double>(viol) / static_cast<double>(n)},
                   {"wilson_95", {w.lo, w.hi}},
                   {"aux_means", aux_means}});
  }
  return out;
}

void write_outputs(const ExperimentConfig& cfg, const RunResult& r) {
  std::filesystem::create_directories(cfg.output_dir);
  {
    std::ofstream csv(cfg.output_dir / "trials.csv", std::ios::binary);
    csv << kCsvHeader << '\n';
    const std::string_view name = to_string(cfg.experiment);
    for (const auto& rec : r.records) csv << csv_row(name, rec) << '\n';
    if (!csv) throw std::runtime_error("failed writing trials.csv");
  }
  std::ofstream rep(cfg.output_dir / "report.json", std::ios::binary);
  rep << r.report.dump(2) << '\n';
  if (!rep) throw std::runtime_error("failed writing report.json");
}

namespace {

// NaN is written as null; two nulls compare equal.
void diff_json(const Json& a, const Json& b, const std::string& path, std::vector<std::string>& out) {
  if (a.is_number() && b.is_number()) {
    if (a.get<double>() != b.get<double>())
      out.push_back(path + ": recomputed " + g17(a.get<double>()) + " vs stored " + g17(b.get<double>()));
    return;
  }
  if (a.type() != b.type()) {
    out.push_back(path + ": type differs");
    return;
  }
  if (a.is_object()) {
    for (const auto& [key, v] : a.items()) {
      if (!b.contains(key)) out.push_back(path + "." + key + ": missing from report");
      else diff_json(v, b.at(key), path + "." + key, out);
    }
    for (const auto& [key, _] : b.items())
      if (!a.contains(key)) out.push_back(path + "." + key + ": not recomputable");
  } else if (a.is_array()) {
    if (a.size() != b.size()) {
      out.push_back(path + ": length differs");
      return;
    }
    for (std::size_t i = 0; i < a.size(); ++i) diff_json(a[i], b[i], path + "[" + std::to_string(i) + "]", out);
  } else if (a != b) {
    out.push_back(path + ": value differs");
  }
}

}  // namespace

VerifyResult verify_report(const std::filesystem::path& dir) {
  const std::vector<TrialRecord> recs = read_trials_csv(dir / "trials.csv");
  std::ifstream in(dir / "report.json");
  if (!in) throw ConfigError("cannot open " + (dir / "report.json").string());
  const Json report = Json::parse(in);
  // Round-trip through the JSON text so NaN maps to null on both sides.
  const Json recomputed = Json::parse(aggregate_records(recs).dump());
  VerifyResult v;
  if (!report.contains("per_k")) {
    v.ok = false;
    v.differences.push_back("report has no per_k section");
    return v;
  }
  diff_json(recomputed, report.at("per_k"), "per_k", v.differences);
  v.ok = v.differences.empty();
  return v;
}

}  // namespace cutlab
