#ifndef LCM_HARNESS_HPP
#define LCM_HARNESS_HPP

// Monte Carlo experiment runner. Every replication derives its own seed from
// (master_seed, cell_index, replication), so results do not depend on the
// number of worker threads or on scheduling order.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcm/gof.hpp"
#include "lcm/model.hpp"

namespace lcm {

struct GridCell {
  int n_subjects = 200;
  int n_items = 60;
  int n_classes = 3;
  double delta = 0.2;
  int max_category = 5;
};

struct SelectOverrides {
  std::optional<double> tau_exponent;
  std::optional<double> gamma_multiplier;
  std::optional<int> k_max;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<GridCell> grid;
  int reps = 200;
  std::uint64_t master_seed = 42;
  std::vector<Method> methods{Method::kGof, Method::kRgof};
  SelectOverrides overrides;
  // When set, every replication also records T and r for K0 = 1..profile_k0
  // irrespective of where the selection rules stop.
  std::optional<int> profile_k0;
};

/// Throws InputError on reps < 1, an empty grid, no methods, or a delta
/// outside (0, 0.5].
void validate(const ExperimentConfig& cfg);

/// Parses the JSON config format; unknown keys are rejected with InputError.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct StatSummary {
  int k0 = 0;
  double t_mean = 0.0;
  double t_sd = 0.0;
  int t_count = 0;
  double r_mean = 0.0;  // over finite ratios
  double r_sd = 0.0;
  int r_count = 0;
  int r_infinite = 0;
};

struct MethodOutcome {
  Method method = Method::kGof;
  int k_hat = 0;
  double runtime_ms = 0.0;
  std::optional<GofTrace> trace;  // absent for spec
};

struct ReplicationRecord {
  int replication = 0;
  std::uint64_t seed = 0;
  int membership_resamples = 0;
  std::vector<MethodOutcome> outcomes;  // in config method order
  std::vector<CandidateRecord> profile;
};

struct MethodCellResult {
  Method method = Method::kGof;
  double accuracy = 0.0;
  double std_error = 0.0;
  double mean_runtime_ms = 0.0;
  std::vector<StatSummary> stat_summaries;  // over candidates each trace evaluated
  std::map<int, int> stop_distribution;     // k_hat -> count
};

struct CellResult {
  int cell_index = 0;
  GridCell cell;
  std::optional<std::string> error;  // set when the cell was skipped
  std::vector<MethodCellResult> methods;
  std::vector<StatSummary> profile;
  std::vector<ReplicationRecord> replications;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;
};

/// threads = 0 uses the hardware concurrency.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

/// Writes <name>_accuracy.csv, <name>_stops.csv, <name>_stats.csv,
/// <name>.json (deterministic) and <name>_timing.csv (wall-clock, varies).
void write_experiment(const ExperimentResult& result,
                      const std::filesystem::path& out_dir);

/// sqrt(acc (1 - acc) / reps).
double accuracy_std_error(double accuracy, int reps);

/// Mean/sd (n - 1 denominator) per K0 over a set of candidate traces.
std::vector<StatSummary> summarize_candidates(
    const std::vector<std::vector<CandidateRecord>>& traces);

enum class SensitivityKind { kTau, kGamma };
SensitivityKind parse_sensitivity_kind(const std::string& name);
std::string to_string(SensitivityKind kind);

struct SensitivityRow {
  double value = 0.0;
  double accuracy = 0.0;
  double std_error = 0.0;
};

struct SensitivityTable {
  SensitivityKind kind = SensitivityKind::kTau;
  GridCell cell;
  int reps = 0;
  std::uint64_t master_seed = 0;
  std::vector<SensitivityRow> rows;
};

/// kTau varies tau_exponent under gof; kGamma varies gamma_multiplier under
/// rgof. All values share the same simulated datasets and fits.
SensitivityTable run_threshold_sensitivity(SensitivityKind kind,
                                           const std::vector<double>& values,
                                           const GridCell& base_cell, int reps,
                                           std::uint64_t master_seed,
                                           int threads = 0);

void write_sensitivity(const SensitivityTable& table,
                       const std::filesystem::path& path);

/// Evaluates every K0 up to K_max and writes <stem>.csv (k0, sigma1, t_stat,
/// ratio) and <stem>.json (full trace).
GofTrace emit_statistic_curves(const ResponseMatrix& r, const SelectConfig& cfg,
                               const std::filesystem::path& out_stem);

/// Serialized trace as JSON text.
std::string trace_to_json(const GofTrace& trace);

/// Named presets: exp1, exp2, exp3, exp4, exp6. `quick` sets reps = 50.
ExperimentConfig experiment_preset(const std::string& name, bool quick);
std::vector<std::string> preset_names();

/// Base cell and value grids of the threshold-sensitivity experiment.
GridCell sensitivity_base_cell();
std::vector<double> sensitivity_default_values(SensitivityKind kind);

}  // namespace lcm

#endif  // LCM_HARNESS_HPP
