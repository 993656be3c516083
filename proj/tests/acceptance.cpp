// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "cutlab/concentration.hpp"
#include "cutlab/cutnorm.hpp"
#include "cutlab/experiments.hpp"
#include "cutlab/kernel.hpp"
#include "cutlab/rng.hpp"
#include "cutlab/vkernel.hpp"

using namespace cutlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0 && secs > limit_seconds) {
    o.passed = false;
    o.detail += " [over time limit " + std::to_string(limit_seconds) + " s]";
  }
  if (!o.passed) ++failures;
  std::printf("%s %2d %s: %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

KernelSpec random_kernel(Stream& rng) {
  switch (rng.below(4)) {
    case 0: return KernelSpec::pow_corner(rng.uniform(0.0, 0.3), rng.uniform(0.5, 2.0));
    case 1: return KernelSpec::signed_pow(rng.uniform(0.0, 0.3), rng.uniform(0.5, 2.0));
    case 2: return KernelSpec::checkerboard(2 + static_cast<int>(rng.below(4)), rng.uniform(0.5, 2.0));
    default: {
      const int m = 2 + static_cast<int>(rng.below(3));
      std::vector<double> v(static_cast<std::size_t>(m * m));
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) v[i * m + j] = v[j * m + i] = rng.uniform(-1.0, 1.0);
      return KernelSpec::step(m, std::move(v));
    }
  }
}

std::vector<Interval> random_union(Stream& rng) {
  std::vector<double> cuts;
  const std::size_t n = 2 * (1 + rng.below(3));
  for (std::size_t i = 0; i < n; ++i) cuts.push_back(rng.uniform());
  std::sort(cuts.begin(), cuts.end());
  std::vector<Interval> u;
  for (std::size_t i = 0; i < n; i += 2) u.push_back({cuts[i], cuts[i + 1]});
  return u;
}

RunResult campaign(Json j) {
  return run_experiment(config_from_json(j));
}

bool checks_pass(const RunResult& r, const std::string& prefix, std::string& detail) {
  bool ok = true, any = false;
  for (const auto& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) {
      any = true;
      if (!c.passed) {
        ok = false;
        detail += " [" + c.name + " k=" + std::to_string(c.k) + ": " + c.detail + "]";
      }
    }
  return ok && any;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Json kPowCorner = {{"family", "pow_corner"}, {"alpha", 0.2}, {"c", 1.0}};

Json first_lemma_config() {
  return {{"experiment", "first-lemma"},
          {"kernel", kPowCorner},
          {"k_grid", {16, 32, 64, 128, 256, 512, 1024, 2048, 4096}},
          {"p", 3},
          {"params", {{"phi", 0.2}, {"gamma", 0.45}, {"nu", 2.0}}},
          {"trials", 1000},
          {"master_seed", 20240601}};
}

}  // namespace

int main() {
  unsetenv("CUTNORM_LAB_WORKERS");
  const fs::path scratch = fs::temp_directory_path() / "cutlab_acceptance";
  fs::remove_all(scratch);

  criterion(1, "cut-norm oracle equivalence", 30.0, [] {
    Stream rng(1);
    double worst = 0.0;
    int bad = 0;
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 2 + rng.below(11);
      const KernelSpec U = t % 2 ? KernelSpec::signed_pow(0.2) : KernelSpec::pow_corner(0.3);
      const StepKernel W = draw_sample(U, n, derive_seed(1, "oracle", t)).kernel;
      const double a = cut_norm_exact(W).value, b = matrix_cut_norm_oracle(W).value;
      // Values are normalized by n^2, so the raw-sum tolerance 1e-12 n^2 max|W| becomes this.
      const double tol = 1e-12 * W.max_abs();
      const double gap = std::abs(a - b);
      worst = std::max(worst, gap / std::max(W.max_abs(), 1e-300));
      bad += gap > tol;
    }
    return Outcome{bad == 0, std::to_string(bad) + "/200 mismatches, worst relative gap " + fmt(worst)};
  });

  criterion(2, "step-function lemma", 0.0, [] {
    Stream rng(2);
    int bad = 0;
    double worst = -INFINITY;
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> v(36);
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i; j < 6; ++j) v[i * 6 + j] = v[j * 6 + i] = rng.uniform(-1.0, 1.0);
      const StepKernel W(6, v);
      const double norm = cut_norm_exact(W).value;
      const double s = std::abs(step_restriction_value(W, random_union(rng), random_union(rng)));
      worst = std::max(worst, s - norm);
      bad += s > norm + 1e-12;
    }
    return Outcome{bad == 0, std::to_string(bad) + "/1000 violations, max excess " + fmt(worst)};
  });

  criterion(3, "replacement inequality", 300.0, [] {
    Stream rng(3);
    int bad = 0, n = 0;
    for (int t = 0; t < 10000; ++t) {
      const KernelSpec U = random_kernel(rng);
      const SamplePoints X = draw_points(10, derive_seed(3, "replacement", t));
      const std::size_t a = rng.below(10);
      const double x0 = rng.uniform();
      for (bool one_sided : {false, true}) {
        bad += !replacement_inequality_check(U, X, a, x0, one_sided).holds;
        ++n;
      }
    }
    return Outcome{bad == 0, std::to_string(bad) + "/" + std::to_string(n) + " violations"};
  });

  criterion(4, "Frobenius identity", 0.0, [] {
    const FrobeniusCheck f = frobenius_check(KernelSpec::pow_corner(0.2), 16, 10000, 4);
    return Outcome{std::abs(f.z_score) <= 4.0,
                   "mean " + fmt(f.empirical_mean_sq) + " vs " + fmt(f.target) + ", z " + fmt(f.z_score)};
  });

  RunResult systematic;
  criterion(5, "lower systematic bound", 0.0, [&] {
    systematic = campaign({{"experiment", "systematic-error"},
                           {"kernel", kPowCorner},
                           {"k_grid", {8, 16, 32}},
                           {"p", 3},
                           {"trials", 10000},
                           {"master_seed", 5}});
    std::string d;
    const bool ok = checks_pass(systematic, "systematic_lower", d);
    for (const auto& c : systematic.checks)
      if (c.name == "systematic_lower") d += " k=" + std::to_string(c.k) + ": " + c.detail + ";";
    return Outcome{ok, d};
  });

  criterion(6, "upper systematic bound", 0.0, [&] {
    std::string d;
    const bool ok = checks_pass(systematic, "systematic_upper", d);
    for (const auto& c : systematic.checks)
      if (c.name == "systematic_upper") d += " k=" + std::to_string(c.k) + ": " + c.detail + ";";
    return Outcome{ok, d};
  });

  criterion(7, "first sampling lemma", 600.0, [] {
    const RunResult r = campaign(first_lemma_config());
    std::size_t viol = 0;
    for (const auto& rec : r.records) viol += rec.violated;
    std::string d = std::to_string(r.records.size()) + " trials over 9 k values, " +
                    std::to_string(viol) + " violating trials";
    return Outcome{checks_pass(r, "first_", d), d};
  });

  criterion(8, "truncation bound", 0.0, [] {
    const RunResult r = campaign({{"experiment", "truncation"},
                                  {"kernel", kPowCorner},
                                  {"k_grid", {64}},
                                  {"p", 3},
                                  {"trials", 40},
                                  {"master_seed", 8}});
    double worst = 0.0;
    for (const auto& rec : r.records)
      worst = std::max(worst, std::abs(rec.deviation) / std::max(1.0, rec.sample_cut_norm));
    std::string d = "40 grid points in (||U||_1, 8||U||_p], worst route gap " + fmt(worst);
    return Outcome{checks_pass(r, "truncation_", d), d};
  });

  criterion(9, "q-subsample inequalities", 600.0, [] {
    const RunResult r = campaign({{"experiment", "appendix"},
                                  {"kernel", {{"family", "signed_pow"}, {"alpha", 0.2}}},
                                  {"k_grid", {10}},
                                  {"p", 3},
                                  {"q_grid", {2, 3}},
                                  {"trials", 1000},
                                  {"bplus_trials", 200},
                                  {"master_seed", 9}});
    std::string d;
    for (const auto& c : r.checks) d += c.name + " " + c.detail + "; ";
    bool exact = true;
    for (const auto& rec : r.records)
      exact = exact && rec.aux.at("bs12_q2_exact") != 0.0 && rec.aux.at("bs12_q3_exact") != 0.0;
    return Outcome{exact && checks_pass(r, "bs12_", d) && checks_pass(r, "bplus_", d), d};
  });

  criterion(10, "vector sandwich", 0.0, [] {
    Stream rng(10);
    int bad = 0, search_bad = 0;
    for (std::size_t d : {2, 3}) {
      const EpsilonNet net = build_epsilon_net(d, 0.25);
      for (int t = 0; t < 50; ++t) {
        const std::size_t n = 8;
        std::vector<double> v(n * n * d);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i; j < n; ++j)
            for (std::size_t c = 0; c < d; ++c) {
              const double x = rng.uniform(-1.0, 1.0);
              v[(i * n + j) * d + c] = v[(j * n + i) * d + c] = x;
            }
        const VectorStepKernel W(n, d, std::move(v));
        const double exact = vector_cut_norm_exact(W).value;
        const double netv = vector_cut_norm_net(W, net);
        bad += netv > exact + 1e-12 || exact > netv / 0.75 + 1e-12;
        if (t < 1) {
          // Random points of the l_inf sphere never beat the vertex maximum.
          for (int s = 0; s < 10000; ++s) {
            std::vector<double> f(d);
            for (double& x : f) x = rng.uniform(-1.0, 1.0);
            f[rng.below(d)] = rng.coin() ? 1.0 : -1.0;
            search_bad += cut_norm_exact(scalarize(W, f)).value > exact + 1e-12;
          }
        }
      }
    }
    return Outcome{bad == 0 && search_bad == 0,
                   std::to_string(bad) + "/100 sandwich violations (d=2,3, eps=0.25), " +
                       std::to_string(search_bad) + "/20000 sphere points above the vertex maximum"};
  });

  criterion(11, "second sampling lemma", 0.0, [] {
    const RunResult r = campaign({{"experiment", "second-lemma"},
                                  {"kernel", kPowCorner},
                                  {"k_grid", {16, 32, 64, 128}},
                                  {"p", 3},
                                  {"params", {{"phi", 0.1}}},
                                  {"trials", 100},
                                  {"master_seed", 11}});
    std::string d;
    for (const auto& a : r.report["per_k"])
      d += "k=" + std::to_string(a["k"].get<std::size_t>()) + " median " + fmt(a["median"].get<double>()) + "; ";
    for (const auto& t : r.report["theory"]) {
      d += "bound " + fmt(t["bound"]["value"].get<double>()) + "; ";
      break;
    }
    for (const auto& c : r.checks)
      if (c.name == "median_trend") d += c.detail;
    return Outcome{checks_pass(r, "second_lemma_bound", d) && checks_pass(r, "median_trend", d), d};
  });

  criterion(12, "determinism across workers", 0.0, [&] {
    std::string files[2];
    int idx = 0;
    for (int w : {1, 8}) {
      Json j = first_lemma_config();
      j["workers"] = w;
      j["output_dir"] = (scratch / ("w" + std::to_string(w))).string();
      const ExperimentConfig cfg = config_from_json(j);
      write_outputs(cfg, run_experiment(cfg));
      files[idx++] = slurp(cfg.output_dir / "trials.csv");
    }
    const bool same = !files[0].empty() && files[0] == files[1];
    return Outcome{same, same ? "trials.csv byte-identical (" + std::to_string(files[0].size()) + " bytes)"
                              : std::string("trials.csv differs")};
  });

  fs::remove_all(scratch);
  std::printf("%s: %d of 12 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
