#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cutlab/errors.hpp"
#include "cutlab/experiments.hpp"
#include "cutlab/rng.hpp"
#include "cutlab/stats.hpp"
#include "doctest.h"

using namespace cutlab;
namespace fs = std::filesystem;

namespace {

Json base_config(const char* experiment) {
  return Json{{"experiment", experiment},
              {"kernel", {{"family", "pow_corner"}, {"alpha", 0.2}, {"c", 1.0}}},
              {"k_grid", {8, 16}},
              {"p", 3},
              {"trials", 20},
              {"master_seed", 99}};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cutlab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool all_named_pass(const RunResult& r, const std::string& prefix) {
  bool any = false;
  for (const auto& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) {
      any = true;
      if (!c.passed) return false;
    }
  return any;
}

}  // namespace

TEST_CASE("config validation") {
  unsetenv("CUTNORM_LAB_WORKERS");
  CHECK_NOTHROW(config_from_json(base_config("first-lemma")));
  auto bad = [](auto edit) {
    Json j = base_config("first-lemma");
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["k_grid"] = {16, 8}; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["k_grid"] = Json::array(); })), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["trials"] = 0; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["experiment"] = "third-lemma"; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["trails"] = 5; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["kernel"] = {{"family", "nope"}}; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["params"] = {{"nu", "two"}}; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["mode"] = "coupled"; })), ConfigError);
  // Samples are always random: there is no way to inject points.
  CHECK_THROWS_AS(config_from_json(bad([](Json& j) { j["points"] = {0.1, 0.2}; })), ConfigError);

  Json signed_cfg = base_config("first-lemma");
  signed_cfg["kernel"] = {{"family", "signed_pow"}, {"alpha", 0.2}};
  signed_cfg["k_grid"] = {16, 32};
  CHECK_THROWS_AS(run_experiment(config_from_json(signed_cfg)), ConfigError);

  Json second = base_config("second-lemma");
  second["kernel"] = {{"family", "signed_pow"}, {"alpha", 0.2}};
  CHECK_THROWS_AS(run_experiment(config_from_json(second)), ConfigError);

  // Unsatisfiable theorem parameters surface as config errors.
  Json phi = base_config("second-lemma");
  phi["params"] = {{"phi", 0.4}};
  CHECK_THROWS_AS(run_experiment(config_from_json(phi)), ConfigError);
}

TEST_CASE("worker override") {
  setenv("CUTNORM_LAB_WORKERS", "3", 1);
  CHECK(effective_workers(8) == 3);
  setenv("CUTNORM_LAB_WORKERS", "zero", 1);
  CHECK(effective_workers(8) == 8);
  unsetenv("CUTNORM_LAB_WORKERS");
  CHECK(effective_workers(0) == 1);
}

TEST_CASE("one record per k and trial") {
  Json j = base_config("first-lemma");
  j["trials"] = 1;
  j["k_grid"] = {4, 16, 64};
  const RunResult r = run_experiment(config_from_json(j));
  REQUIRE(r.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.records[i].trial_index == 0);
    CHECK(r.records[i].deviation == r.records[i].sample_cut_norm - r.records[i].reference_cut_norm);
  }
  CHECK(r.report["per_k"].size() == 3);
}

TEST_CASE("records do not depend on the worker count") {
  unsetenv("CUTNORM_LAB_WORKERS");
  for (const char* name : {"first-lemma", "dispersion", "second-lemma"}) {
    Json j = base_config(name);
    j["mean_trials"] = 200;
    j["params"] = {{"phi", 0.1}};
    if (std::string(name) == "second-lemma") j["k_grid"] = {16, 32};
    j["workers"] = 1;
    const RunResult a = run_experiment(config_from_json(j));
    j["workers"] = 5;
    const RunResult b = run_experiment(config_from_json(j));
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i)
      CHECK(csv_row(name, a.records[i]) == csv_row(name, b.records[i]));
  }
}

TEST_CASE("csv round trip and verify-report") {
  Json j = base_config("appendix");
  j["kernel"] = {{"family", "signed_pow"}, {"alpha", 0.2}};
  j["k_grid"] = {6, 9};
  j["q_grid"] = {2, 3};
  const fs::path dir = scratch("roundtrip");
  j["output_dir"] = dir.string();
  const ExperimentConfig cfg = config_from_json(j);
  const RunResult r = run_experiment(cfg);
  write_outputs(cfg, r);
  const auto back = read_trials_csv(dir / "trials.csv");
  REQUIRE(back.size() == r.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(csv_row("appendix", back[i]) == csv_row("appendix", r.records[i]));
    CHECK(back[i].aux == r.records[i].aux);
    CHECK(back[i].sample_cut_norm == r.records[i].sample_cut_norm);
  }
  const VerifyResult ok = verify_report(dir);
  CHECK(ok.ok);
  CHECK(ok.differences.empty());

  // Nudge one stored value: the recomputed aggregates must disagree.
  std::string csv = slurp(dir / "trials.csv");
  const auto line2 = csv.find('\n') + 1;
  std::size_t field = line2;
  for (int c = 0; c < 4; ++c) field = csv.find(',', field) + 1;
  const auto end = csv.find(',', field);
  csv.replace(field, end - field, "123.5");
  std::ofstream(dir / "trials.csv", std::ios::binary) << csv;
  const VerifyResult bad = verify_report(dir);
  CHECK_FALSE(bad.ok);
  CHECK_FALSE(bad.differences.empty());
  fs::remove_all(dir);

  CHECK_THROWS_AS(read_trials_csv(dir / "missing.csv"), ConfigError);
}

TEST_CASE("nan survives the csv") {
  TrialRecord t;
  t.k = 5;
  t.reference_cut_norm = std::nan("");
  t.deviation = std::nan("");
  t.aux["x"] = std::nan("");
  t.aux["y"] = 0.1;
  const fs::path dir = scratch("nan");
  fs::create_directories(dir);
  std::ofstream(dir / "trials.csv") << kCsvHeader << '\n' << csv_row("appendix", t) << '\n';
  const auto back = read_trials_csv(dir / "trials.csv");
  REQUIRE(back.size() == 1);
  CHECK(std::isnan(back[0].reference_cut_norm));
  CHECK(std::isnan(back[0].aux.at("x")));
  CHECK(back[0].aux.at("y") == 0.1);
  fs::remove_all(dir);
}

TEST_CASE("wilson interval coverage on bernoulli streams") {
  Stream rng(2024);
  for (double p : {0.02, 0.1, 0.5}) {
    int covered = 0;
    const int reps = 2000, n = 300;
    for (int r = 0; r < reps; ++r) {
      std::size_t hits = 0;
      for (int i = 0; i < n; ++i) hits += rng.uniform() < p;
      const Interval01 w = wilson_interval(hits, n);
      CHECK(w.lo >= 0.0);
      CHECK(w.hi <= 1.0);
      covered += (w.lo <= p && p <= w.hi);
    }
    CHECK(static_cast<double>(covered) / reps > 0.93);
  }
}

TEST_CASE("systematic error on a constant kernel") {
  Json j = base_config("systematic-error");
  j["kernel"] = {{"family", "step"}, {"m", 1}, {"values", {0.75}}};
  j["k_grid"] = {8, 32};
  j["trials"] = 10;
  const RunResult r = run_experiment(config_from_json(j));
  for (const auto& rec : r.records)
    CHECK(rec.sample_cut_norm == doctest::Approx((rec.k - 1.0) / rec.k * 0.75).epsilon(1e-15));
  CHECK(r.all_passed());
}

TEST_CASE("campaign smoke runs") {
  unsetenv("CUTNORM_LAB_WORKERS");
  SUBCASE("first lemma") {
    const RunResult r = run_experiment(config_from_json(base_config("first-lemma")));
    CHECK(r.all_passed());
    CHECK(r.report["theory"].size() == 2);
  }
  SUBCASE("systematic error") {
    Json j = base_config("systematic-error");
    j["trials"] = 200;
    const RunResult r = run_experiment(config_from_json(j));
    CHECK(all_named_pass(r, "systematic_lower"));
    CHECK(all_named_pass(r, "systematic_upper"));
    CHECK(all_named_pass(r, "frobenius_identity"));
  }
  SUBCASE("dispersion") {
    Json j = base_config("dispersion");
    j["mean_trials"] = 500;
    CHECK(run_experiment(config_from_json(j)).all_passed());
  }
  SUBCASE("l0") {
    Json j = base_config("l0");
    j["params"] = {{"gamma", 0.5}};
    const RunResult r = run_experiment(config_from_json(j));
    CHECK(r.all_passed());
    const double b = l0_probability_bound(KernelSpec::pow_corner(0.2), 3.0, 2.0, 0.5, 16);
    CHECK(r.report["theory"][1]["membership_probability_bound_raw"].get<double>() == b);
  }
  SUBCASE("appendix") {
    Json j = base_config("appendix");
    j["k_grid"] = {10};
    j["q_grid"] = {2, 3};
    j["bplus_trials"] = 5;
    const RunResult r = run_experiment(config_from_json(j));
    CHECK(all_named_pass(r, "bs12_q2"));
    CHECK(all_named_pass(r, "bs12_q3"));
    CHECK(all_named_pass(r, "bplus_q2"));
    Json big = j;
    big["k_grid"] = {40};
    CHECK_THROWS_AS(run_experiment(config_from_json(big)), ConfigError);
  }
  SUBCASE("vector") {
    Json j = base_config("vector");
    j.erase("kernel");
    j["vector_components"] = {{{"family", "pow_corner"}, {"alpha", 0.2}},
                              {{"family", "checkerboard"}, {"m", 2}, {"c", 0.5}}};
    j["k_grid"] = {8};
    j["trials"] = 5;
    const RunResult r = run_experiment(config_from_json(j));
    CHECK(all_named_pass(r, "vector_sandwich"));
    CHECK(r.all_passed());
  }
  SUBCASE("truncation") {
    Json j = base_config("truncation");
    j["k_grid"] = {16};
    j["trials"] = 6;
    const RunResult r = run_experiment(config_from_json(j));
    CHECK(r.all_passed());
    CHECK(r.records.back().aux.at("f") == doctest::Approx(8.0 * lp_norm(KernelSpec::pow_corner(0.2), 3.0).value));
  }
  SUBCASE("second lemma") {
    Json j = base_config("second-lemma");
    j["params"] = {{"phi", 0.1}};
    j["k_grid"] = {16, 32};
    j["trials"] = 5;
    const RunResult r = run_experiment(config_from_json(j));
    CHECK(all_named_pass(r, "second_lemma_bound"));
    for (const auto& rec : r.records)
      CHECK(rec.sample_cut_norm == rec.aux.at("delta_upper") + rec.aux.at("discretization_charge"));
  }
  SUBCASE("almost sure, both modes") {
    Json j = base_config("almost-sure");
    j["kernel"] = {{"family", "pow_corner"}, {"alpha", 0.1}};
    j["p"] = 6;
    j["params"] = {{"phi", 0.1}};
    j["k_grid"] = {8, 16, 32, 64};
    j["trials"] = 1;
    const RunResult nested = run_experiment(config_from_json(j));
    const RunResult again = run_experiment(config_from_json(j));
    CHECK(nested.records.size() == 4);
    CHECK(nested.all_passed());
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(csv_row("almost-sure", nested.records[i]) == csv_row("almost-sure", again.records[i]));
      CHECK(nested.records[i].seed == nested.records[0].seed);
    }
    j["mode"] = "independent";
    const RunResult indep = run_experiment(config_from_json(j));
    CHECK(indep.records.size() == 4);
    CHECK(indep.records[0].seed != indep.records[1].seed);
    for (const auto& rec : indep.records) CHECK(std::isfinite(rec.sample_cut_norm));
  }
}
