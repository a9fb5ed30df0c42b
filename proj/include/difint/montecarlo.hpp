#pragma once

// Repeated-trial harness: every estimator in a trial consumes the identical
// sampled dataset, trials are seeded per index from the master seed, and the
// aggregation is reduced in trial order so reruns are bit-identical no matter
// how many worker threads run.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "difint/fisher_crb.hpp"
#include "difint/joint_distribution.hpp"
#include "difint/ml_estimator.hpp"

namespace difint {

enum class Estimator { ml, ellipse_specific, ellipse_trace, ellipse_geometric };

std::string estimator_name(Estimator e);
std::optional<Estimator> estimator_from_name(const std::string& name);

// Exclusion bits in TrialRecord::excluded_flags.
inline constexpr unsigned kExcludedMl = 1u << 0;
inline constexpr unsigned kExcludedEllipseSpecific = 1u << 1;
inline constexpr unsigned kExcludedEllipseTrace = 1u << 2;
inline constexpr unsigned kExcludedEllipseGeometric = 1u << 3;

struct TrialRecord {
  double theta_ml = 0.0;
  double sigma_ml = 0.0;
  double tau_ml = 0.0;        // small-noise inversion
  double tau_ml_exact = 0.0;  // exact-variance inversion
  double theta_efs = 0.0;
  double theta_etr = 0.0;
  double theta_geo = 0.0;
  unsigned excluded_flags = 0;
};

struct SummaryStats {
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;
  double mean = 0.0;
  double stddev = 0.0;   // sample standard deviation
  double bias = 0.0;     // mean - truth
  double se_mean = 0.0;  // stddev / sqrt(n)
  double se_std = 0.0;   // stddev / sqrt(2 (n - 1))
};

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
};

struct RunSpec {
  InterferometerConfig config;
  std::size_t m = 100;
  std::size_t n_trials = 1000;
  std::set<Estimator> estimators = {Estimator::ml};
  std::uint64_t master_seed = 1;
  std::size_t k_phi = 0;  // 0 = auto
  int threads = 0;        // 0 = hardware concurrency

  void validate() const;
};

struct TrialStatistics {
  RunSpec spec;
  double theta_true = 0.0;
  double sigma_true = 0.0;  // sqrt(1/N1 + 1/N2 + (N1+N2) tau^2)
  std::vector<TrialRecord> trials;
  // keys: theta_ml, sigma_ml, tau_ml, tau_ml_exact, theta_efs, theta_etr, theta_geo
  std::map<std::string, SummaryStats> summary;
  std::map<std::string, Histogram> histograms;
  bool crb_valid = false;
  FisherMatrix fim;
  double crb_dtheta = 0.0;  // sqrt of the theta-theta CRB entry per m shots
  double crb_dsigma = 0.0;
  AnalyticBounds bounds;
  double wall_seconds = 0.0;  // diagnostic only, never serialized
};

TrialStatistics run_trials(const RunSpec& spec);

enum class SweepAxis { none, total_particles, theta_true, tau_true, shots };

std::string sweep_axis_name(SweepAxis axis);
std::optional<SweepAxis> sweep_axis_from_name(const std::string& name);

struct SweepSpec {
  RunSpec base;
  SweepAxis axis = SweepAxis::none;
  std::vector<double> values;  // ignored for axis == none

  void validate() const;
};

// Applies one swept value to the base spec.
RunSpec apply_sweep_value(const SweepSpec& spec, double value);

struct SweepPoint {
  double value = 0.0;
  bool failed = false;
  std::string error;
  TrialStatistics stats;
};

// Runs one point per value; per-value failures are recorded and skipped.
std::vector<SweepPoint> sweep(const SweepSpec& spec);

}  // namespace difint
