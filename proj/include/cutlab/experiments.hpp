#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cutlab/concentration.hpp"
#include "cutlab/cutdist.hpp"
#include "cutlab/io.hpp"
#include "cutlab/kernel.hpp"

namespace cutlab {

enum class ExperimentKind {
  FirstLemma,
  SecondLemma,
  SystematicError,
  Dispersion,
  L0,
  Appendix,
  Vector,
  Truncation,
  AlmostSure,
};

std::string_view to_string(ExperimentKind e);
ExperimentKind experiment_from_string(std::string_view s);

/// Signed samples need exact cut norms; beyond this k the campaigns refuse.
inline constexpr std::size_t kSignedSampleLimit = 24;

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::FirstLemma;
  KernelSpec kernel = KernelSpec::pow_corner(0.2);
  std::vector<std::size_t> k_grid{16};
  ConcentrationParams params;  // params.p is the config's p
  int trials = 100;
  std::uint64_t master_seed = 0;
  int workers = 1;
  std::filesystem::path output_dir = "out";

  // Campaign-specific knobs.
  std::vector<KernelSpec> vector_components;  // vector campaign
  double epsilon = 0.25;                      // vector campaign net pitch
  std::vector<int> q_grid;                    // appendix; defaults to {params.q}
  int bplus_trials = 200;                     // appendix
  int mean_trials = 20000;                    // dispersion mean batch
  AnnealConfig anneal{0.9, 20, 10, 1, 0.0, AnnealObjective::Frobenius, 12, 4};
  int discretization = 0;                     // 0 selects m = k
  bool nested = true;                         // almost-sure mode

  Json raw;  // the parsed input, echoed into the report
};

/// Validates and fills defaults; throws ConfigError naming the field.
ExperimentConfig config_from_json(const Json& j);

struct TrialRecord {
  std::size_t k = 0;
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  double sample_cut_norm = 0.0;
  std::string method;
  double reference_cut_norm = 0.0;
  double deviation = 0.0;
  double bound_rhs = 0.0;
  bool violated = false;
  std::map<std::string, double> aux;
};

struct CheckResult {
  std::string name;
  std::size_t k = 0;  // 0 for run-wide checks
  bool passed = true;
  std::string detail;
};

struct RunResult {
  std::vector<TrialRecord> records;
  Json report;
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Runs the campaign. Trials are spread over `workers` threads (overridden by
/// CUTNORM_LAB_WORKERS); results are folded in (k, trial) order, so the
/// records do not depend on the worker count.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Effective worker count after the environment override.
int effective_workers(int configured);

inline constexpr const char* kCsvHeader =
    "experiment,k,trial_index,seed,sample_cut_norm,method,reference_cut_norm,deviation,"
    "bound_rhs,violated,aux";

std::string csv_row(std::string_view experiment, const TrialRecord& r);
std::vector<TrialRecord> read_trials_csv(const std::filesystem::path& path);

/// Per-k aggregates computed from records only (what verify-report recomputes).
Json aggregate_records(const std::vector<TrialRecord>& records);

/// Writes trials.csv and report.json into cfg.output_dir.
void write_outputs(const ExperimentConfig& cfg, const RunResult& r);

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> differences;
};

/// Recomputes the record aggregates from trials.csv and compares them with
/// report.json field by field (exact double equality).
VerifyResult verify_report(const std::filesystem::path& dir);

}  // namespace cutlab
