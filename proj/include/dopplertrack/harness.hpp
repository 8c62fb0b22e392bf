#pragma once

// Monte-Carlo experiment runner: channel -> LS front end -> tracker, per
// trial, plus deterministic aggregation and CSV output.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dopplertrack/config.hpp"
#include "dopplertrack/tracker.hpp"

namespace dopplertrack {

struct ConvergenceRule {
  int window = 50;      // rolling median length
  int hold = 100;       // symbols the median must stay below threshold
  double threshold = 0.1;
};

struct TrialSummary {
  double final_fd = 0.0;
  double median_fd = 0.0;
  double norm_err = 0.0;         // |final - f_d| / f_d, NaN when f_d == 0
  long convergence_symbol = -1;  // -1: never converged
  int warmup_count = 0;
  int clamped_count = 0;
  int not_converged_count = 0;
};

struct TrialResult {
  std::string scenario_id;
  int trial = 0;
  std::vector<DopplerEstimate> series;
  TrialSummary summary;
  std::string error;  // non-empty when the trial failed

  bool ok() const { return error.empty(); }
};

struct ScenarioSummary {
  std::string scenario_id;
  std::string profile;
  double fd_true = 0.0;
  double snr_db = 0.0;
  double duration_ms = 0.0;
  int trials = 0;
  int failed = 0;
  double median_fd_hat = 0.0;
  double mean_norm_err = 0.0;
  double p10_fd_hat = 0.0;
  double p90_fd_hat = 0.0;
  double convergence_symbol = -1.0;  // median over trials; -1 if most never converge
};

struct GridResult {
  std::vector<TrialResult> trials;         // (scenario order, trial index)
  std::vector<ScenarioSummary> summaries;  // scenario order
};

/// Seed shared by every scenario of the same profile and trial index, so
/// scenarios differing only in f_d or SNR see common random numbers.
std::uint64_t trial_seed(const Scenario& s, int trial_index);

TrialResult run_trial(const Scenario& s, int trial_index);

/// Runs every trial of every scenario on up to `parallelism` threads. Output
/// order and content do not depend on `parallelism`.
GridResult run_grid(const std::vector<Scenario>& scenarios, int parallelism = 1);

/// First symbol whose trailing rolling median of |fd_hat - f_d| / f_d is below
/// the threshold and stays below for `hold` symbols (or to the end of the
/// series); -1 if none.
long convergence_symbol(std::span<const DopplerEstimate> series, double fd_true,
                        const ConvergenceRule& rule = {});

TrialSummary summarize_trial(std::span<const DopplerEstimate> series, double fd_true);

ScenarioSummary summarize_scenario(const Scenario& s, std::span<const TrialResult> trials);

/// Linear-interpolated quantile (q in [0, 1]); NaN for an empty sample.
double quantile(std::vector<double> values, double q);

void write_symbol_csv(std::ostream& out, std::span<const TrialResult> trials);
void write_summary_csv(std::ostream& out, std::span<const ScenarioSummary> summaries);

/// Writes symbols.csv and summary.csv into `dir` (created if missing).
/// Throws std::runtime_error when the directory or files cannot be written.
void emit_csv(const GridResult& result, const std::filesystem::path& dir);

}  // namespace dopplertrack
