#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exmerge/config.hpp"

namespace exm {

struct TrajectoryRow {
  std::size_t n = 0;
  double rate = 0.0;
  double raw = 0.0;
  double normalized = 0.0;     // rate * raw
  std::vector<double> extra;   // ExperimentResult::extra_columns
};

struct Trajectory {
  std::size_t replicate = 0;
  std::vector<TrajectoryRow> rows;
  std::vector<double> bounds;  // ExperimentResult::bound_columns, constant per replicate
  double threshold = 0.0;      // L + eps used for coverage
};

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;  // file stem, e.g. "posterior_W" or "predictive_m2"
  std::vector<std::string> extra_columns;
  std::vector<std::string> bound_columns;
  std::vector<Trajectory> trajectories;  // sorted by replicate id
  std::vector<Check> checks;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  /// Set when a replicate failed; trajectories then hold the completed ones.
  std::optional<std::string> failure;
};

/// Directing measure and e_n along the schedule, d(p, e_n) in the theorem's base metric.
ExperimentResult run_simulation(const ExperimentConfig& cfg);

/// Level-two distance between the posterior and the Dirac mass at e_n.
ExperimentResult run_posterior_rate(const ExperimentConfig& cfg);

/// d^W on m-tuple classes between the m-step predictive and e_n^m, one result per m.
std::vector<ExperimentResult> run_predictive_rate(const ExperimentConfig& cfg);

/// Bayes estimate of int g dp against the plug-in mean, with the transport bound.
ExperimentResult run_empirical_bayes(const ExperimentConfig& cfg);

/// Largest normalized value with lo <= n <= hi. Throws InvalidInput on an empty window.
double windowed_max(const Trajectory& t, std::size_t lo, std::size_t hi);

/// Fraction of trajectories whose windowed max is <= L + eps.
double finitary_statistic(const std::vector<Trajectory>& ts, double L, double eps, std::size_t lo, std::size_t hi);

/// Same with each trajectory's own threshold over the result's window.
double coverage(const ExperimentResult& r);

/// Fraction of trajectories with raw(n_hi) <= 0.1 * raw(n_min).
double merging_fraction(const ExperimentResult& r);

/// Adds coverage and merging checks against the config thresholds.
void add_acceptance_checks(ExperimentResult& r, const ExperimentConfig& cfg, bool check_coverage);

/// Writes <name>_<experiment>.csv, <name>_<experiment>_summary.csv and
/// <name>_<experiment>.svg under cfg.output. Returns the paths written.
std::vector<std::filesystem::path> emit_outputs(const ExperimentResult& r, const ExperimentConfig& cfg);

/// Formats a value with 12 significant digits.
std::string format_number(double x);

}  // namespace exm
