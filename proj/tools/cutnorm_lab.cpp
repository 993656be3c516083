#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/experiments.hpp"
#include "cutlab/io.hpp"
#include "cutlab/kernel.hpp"

using namespace cutlab;

namespace {

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

int do_run(const std::string& config_path, const std::string& output_override) {
  ExperimentConfig cfg = config_from_json(load_json(config_path));
  if (!output_override.empty()) cfg.output_dir = output_override;
  const RunResult r = run_experiment(cfg);
  write_outputs(cfg, r);
  std::size_t failed = 0;
  for (const auto& c : r.checks) {
    if (!c.passed) ++failed;
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name;
    if (c.k) std::cout << " k=" << c.k;
    if (!c.detail.empty()) std::cout << "  " << c.detail;
    std::cout << '\n';
  }
  std::cout << r.records.size() << " trials, " << r.checks.size() - failed << "/" << r.checks.size()
            << " checks passed; wrote " << (cfg.output_dir / "trials.csv").string() << " and "
            << (cfg.output_dir / "report.json").string() << '\n';
  return failed ? 2 : 0;
}

int do_cutnorm(const std::string& path, bool exact, bool heuristic, int restarts, std::uint64_t seed) {
  const StepKernel W = step_kernel_from_json(load_json(path));
  CutNormResult r;
  if (exact) r = cut_norm_exact(W);
  else if (heuristic) r = cut_norm_heuristic(W, restarts, seed);
  else r = cut_norm_auto(W, restarts, seed);
  std::cout << to_json(r).dump(2) << '\n';
  return 0;
}

int do_sample(const std::string& path, std::size_t k, std::uint64_t seed) {
  const KernelSpec U = kernel_from_json(load_json(path));
  const Sample s = draw_sample(U, k, seed);
  Json out = {{"kernel", to_json(U)}, {"points", to_json(s.points)}, {"sample", to_json(s.kernel)}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int do_verify(const std::string& dir) {
  const VerifyResult v = verify_report(dir);
  for (const auto& d : v.differences) std::cout << d << '\n';
  std::cout << (v.ok ? "report matches trials.csv\n" : "report differs from trials.csv\n");
  return v.ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling lemma verification harness for unbounded kernels"};
  app.require_subcommand(1);

  std::string config, output;
  auto* run = app.add_subcommand("run", "run a verification campaign");
  run->add_option("--config", config, "campaign config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "override the config's output_dir");

  std::string matrix;
  bool exact = false, heuristic = false;
  int restarts = 16;
  std::uint64_t cut_seed = 0;
  auto* cut = app.add_subcommand("cutnorm", "cut norm of a step kernel");
  cut->add_option("--matrix", matrix, "step kernel (JSON)")->required()->check(CLI::ExistingFile);
  auto* fe = cut->add_flag("--exact", exact, "exact enumeration");
  cut->add_flag("--heuristic", heuristic, "alternating heuristic")->excludes(fe);
  cut->add_option("--restarts", restarts, "heuristic restarts")->check(CLI::PositiveNumber);
  cut->add_option("--seed", cut_seed, "heuristic seed");

  std::string kernel;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  auto* sample = app.add_subcommand("sample", "draw a k-sample of a kernel");
  sample->add_option("--kernel", kernel, "kernel spec (JSON)")->required()->check(CLI::ExistingFile);
  sample->add_option("--k", k, "sample size")->required()->check(CLI::Range(std::size_t{1}, std::size_t{1} << 16));
  sample->add_option("--seed", seed, "seed")->required();

  std::string dir;
  auto* verify = app.add_subcommand("verify-report", "recompute report aggregates from trials.csv");
  verify->add_option("dir", dir, "output directory of a run")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) return do_run(config, output);
    if (*cut) return do_cutnorm(matrix, exact, heuristic, restarts, cut_seed);
    if (*sample) return do_sample(kernel, k, seed);
    if (*verify) return do_verify(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
