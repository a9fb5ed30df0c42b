#pragma once

// Flat key = value run configuration shared by the command drivers. Every
// output embeds the canonical echo of the full configuration, and a rerun
// from that echo reproduces the output files byte for byte.

#include <string>
#include <vector>

#include "difint/montecarlo.hpp"

namespace difint {

struct RunConfig {
  SweepSpec sweep;  // base run plus optional sweep axis/values
};

// Parses `key = value` lines ('#' comments, blank lines allowed; later keys
// override earlier ones). Unknown keys are rejected.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config_file(const std::string& path);

// Canonical text with every key materialized; parse(echo(c)) == c.
std::string run_config_echo(const RunConfig& config);

struct SimulateResult {
  std::string csv_path;
  std::string sidecar_path;
};

// Samples m shots with the configured seed and writes shots.csv plus the
// JSON sidecar into out_dir.
SimulateResult run_simulate(const RunConfig& config, const std::string& out_dir);

// Loads a dataset and runs the joint estimator; returns the result JSON.
std::string run_estimate_json(const std::string& csv_path, const std::string& sidecar_path,
                              std::vector<std::string>* warnings = nullptr);

// Fisher information, CRB and analytic bounds at one point. n1/n2 may be 0
// when no interaction inference is wanted.
std::string run_fisher_json(double theta, double sigma, std::size_t m, int n1 = 0, int n2 = 0,
                            double tau = 0.0);

struct BenchmarkResult {
  std::string summary_path;
  std::string echo_path;
  std::vector<std::string> trial_csv_paths;
};

// Runs the configured trials/sweep and writes summary.json, config_echo.cfg
// and one per-value trials CSV into out_dir.
BenchmarkResult run_benchmark(const RunConfig& config, const std::string& out_dir);

}  // namespace difint
