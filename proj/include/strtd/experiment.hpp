#pragma once

// End-to-end imputation runs: load a sensor x (time . day) matrix, tensorize,
// hide entries per a missing scenario, build priors from what stays observed,
// solve, and write the imputed matrix, metrics, trace, mask and resolved
// config.
//
// Config files are plain "key = value" lines; '#' starts a comment. Keys:
//
//   input            path of the matrix CSV (required)
//   sensors          expected row count (0 = take from the file)
//   slots            time points per day (0 = columns / days)
//   days             days stacked along the columns (default 1)
//   scenario         RM | NM | BM | external (default RM)
//   missing_ratio    RM/NM missing fraction (default 0.3)
//   block_length     NM contiguous slots per (sensor, day) (default 6)
//   window_fraction  BM fraction of time slots removed (default 0.3)
//   mask_file        observed-coordinate CSV, used with scenario = external
//   regularizers     per-mode list of laplacian|temporal|none
//                    (default laplacian,temporal,none)
//   betas            per-mode list of numbers or "auto" (default auto)
//   neighbors        kNN neighbors p (default 5)
//   bandwidth        kernel sigma^2 (default 1)
//   alpha, gamma, tol, max_iters, core_dims, missing_fill
//   seed             mask and initialization seed (default 0)
//   output           artifact directory (default strtd_out)
//   sweep_ratios     comma list used by sweeps
//   threads          parallel sweep instances (default 1)

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "strtd/io.hpp"
#include "strtd/metrics.hpp"
#include "strtd/priors.hpp"
#include "strtd/solver.hpp"

namespace strtd {

struct ExperimentConfig {
  std::filesystem::path input;
  std::size_t sensors = 0;
  std::size_t slots = 0;
  std::size_t days = 1;
  Scenario scenario = Scenario::random;
  ScenarioParams scenario_params{0.3, 6, 0.3};
  std::filesystem::path mask_file;
  std::vector<PriorKind> regularizers{PriorKind::laplacian, PriorKind::temporal, PriorKind::none};
  /// Per-mode beta; empty entries (or an empty list) mean the spectral rule.
  std::vector<std::optional<double>> betas;
  GraphPriorConfig graph;
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "strtd_out";
  std::vector<double> sweep_ratios;
  std::size_t threads = 1;

  void validate() const;
};

/// Throws std::invalid_argument with "<source>:<line>: ..." messages.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "config");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies one "key = value" assignment; `where` prefixes error messages.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& where = "config");
/// Every key with its resolved value, parseable by parse_config.
std::string render_config(const ExperimentConfig& cfg);

/// One regularizer per mode, built from the observed part of x0.
std::vector<ModeRegularizer> build_regularizers(const DenseTensor& x0, const ObservationMask& observed,
                                                const std::vector<PriorKind>& kinds,
                                                const std::vector<std::optional<double>>& betas,
                                                const GraphPriorConfig& graph);

struct ExperimentOutcome {
  std::optional<MetricReport> heldout;
  std::optional<MetricReport> baseline_heldout;
  std::optional<MetricReport> all_entries;
  std::optional<double> observed_rse;
  int iterations = 0;
  StopReason stop_reason = StopReason::none;
  double final_objective = 0.0;
  double runtime_seconds = 0.0;
  std::size_t observed_count = 0;
  std::size_t heldout_count = 0;
  ObservationMask mask;
  TrafficMatrix imputed;
  std::vector<IterationRecord> trace;

  /// Everything except runtime is a deterministic function of the config.
  nlohmann::json metrics_json() const;
};

/// Runs the pipeline; writes artifacts into cfg.output_dir when `write_artifacts`.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_artifacts = true);

/// One run per entry of cfg.sweep_ratios (missing_ratio for RM/NM,
/// window_fraction for BM) in output_dir/ratio_<r>, up to cfg.threads at a
/// time, plus a sweep.csv summary. Results are in sweep_ratios order.
std::vector<ExperimentOutcome> run_sweep(const ExperimentConfig& cfg, bool write_artifacts = true);

}  // namespace strtd
