#include "difint/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "difint/errors.hpp"
#include "difint/io.hpp"
#include "difint/version.hpp"

namespace difint {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *trim(end).c_str() != '\0')
    throw parse_error(key + ": cannot parse number '" + value + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *trim(end).c_str() != '\0')
    throw parse_error(key + ": cannot parse integer '" + value + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *trim(end).c_str() != '\0')
    throw parse_error(key + ": cannot parse unsigned integer '" + value + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  RunSpec& base = cfg.sweep.base;
  if (key == "n1") {
    base.config.n1 = static_cast<int>(parse_integer(key, value));
  } else if (key == "n2") {
    base.config.n2 = static_cast<int>(parse_integer(key, value));
  } else if (key == "tau") {
    base.config.tau = parse_number(key, value);
  } else if (key == "theta1") {
    base.config.theta1 = parse_number(key, value);
  } else if (key == "theta2") {
    base.config.theta2 = parse_number(key, value);
  } else if (key == "n_max") {
    base.config.n_max = static_cast<int>(parse_integer(key, value));
  } else if (key == "m") {
    base.m = static_cast<std::size_t>(parse_integer(key, value));
  } else if (key == "n_trials") {
    base.n_trials = static_cast<std::size_t>(parse_integer(key, value));
  } else if (key == "master_seed") {
    base.master_seed = parse_u64(key, value);
  } else if (key == "k_phi") {
    base.k_phi = static_cast<std::size_t>(parse_integer(key, value));
  } else if (key == "threads") {
    base.threads = static_cast<int>(parse_integer(key, value));
  } else if (key == "estimators") {
    base.estimators.clear();
    for (const auto& name : split_list(value)) {
      const auto est = estimator_from_name(name);
      if (!est) throw parse_error("estimators: unknown estimator '" + name + "'");
      base.estimators.insert(*est);
    }
  } else if (key == "sweep_axis") {
    const auto axis = sweep_axis_from_name(trim(value));
    if (!axis) throw parse_error("sweep_axis: unknown axis '" + value + "'");
    cfg.sweep.axis = *axis;
  } else if (key == "sweep_values") {
    cfg.sweep.values.clear();
    for (const auto& item : split_list(value)) cfg.sweep.values.push_back(parse_number(key, item));
  } else {
    throw parse_error("unknown configuration key '" + key + "'");
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path);
  out << content;
  if (!out) throw io_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json summary_stats_json(const SummaryStats& s) {
  return ordered_json{{"n_used", s.n_used},   {"n_excluded", s.n_excluded},
                      {"mean", s.mean},       {"std", s.stddev},
                      {"bias", s.bias},       {"se_mean", s.se_mean},
                      {"se_std", s.se_std}};
}

ordered_json histogram_json(const Histogram& h) {
  return ordered_json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

ordered_json stats_json(const TrialStatistics& st) {
  ordered_json j;
  j["n1"] = st.spec.config.n1;
  j["n2"] = st.spec.config.n2;
  j["tau_true"] = st.spec.config.tau;
  j["theta_true"] = st.theta_true;
  j["sigma_true"] = st.sigma_true;
  j["m"] = st.spec.m;
  j["n_trials"] = st.spec.n_trials;
  j["master_seed"] = st.spec.master_seed;
  ordered_json sums;
  for (const auto& [k, v] : st.summary) sums[k] = summary_stats_json(v);
  j["summary"] = std::move(sums);
  ordered_json hists;
  for (const auto& [k, v] : st.histograms) hists[k] = histogram_json(v);
  j["histograms"] = std::move(hists);
  j["crb"] = ordered_json{{"valid", st.crb_valid},
                          {"fim_f11", st.fim.f11},
                          {"fim_f12", st.fim.f12},
                          {"fim_f22", st.fim.f22},
                          {"fim_grid_points", st.fim.grid_points},
                          {"dtheta", st.crb_dtheta},
                          {"dsigma", st.crb_dsigma}};
  j["analytic_bounds"] = ordered_json{{"dtheta", st.bounds.dtheta},
                                      {"dsigma", st.bounds.dsigma},
                                      {"dtau", st.bounds.tau_unbounded ? ordered_json(nullptr)
                                                                       : ordered_json(st.bounds.dtau)},
                                      {"dtau_approx", st.bounds.dtau_approx},
                                      {"tau_unbounded", st.bounds.tau_unbounded},
                                      {"small_sigma_regime", st.bounds.small_sigma_regime}};
  return j;
}

std::string trial_cell(double value, bool excluded) {
  return excluded ? "nan" : format_double17(value);
}

std::string trials_csv(const TrialStatistics& st) {
  const bool has_ml = st.spec.estimators.count(Estimator::ml) > 0;
  const bool has_efs = st.spec.estimators.count(Estimator::ellipse_specific) > 0;
  const bool has_etr = st.spec.estimators.count(Estimator::ellipse_trace) > 0;
  const bool has_geo = st.spec.estimators.count(Estimator::ellipse_geometric) > 0;
  std::ostringstream out;
  out << "trial,theta_ml,sigma_ml,tau_ml,theta_efs,theta_etr,theta_geo,excluded_flags\n";
  for (std::size_t t = 0; t < st.trials.size(); ++t) {
    const TrialRecord& r = st.trials[t];
    out << t << ',' << trial_cell(r.theta_ml, !has_ml || (r.excluded_flags & kExcludedMl)) << ','
        << trial_cell(r.sigma_ml, !has_ml || (r.excluded_flags & kExcludedMl)) << ','
        << trial_cell(r.tau_ml, !has_ml || (r.excluded_flags & kExcludedMl)) << ','
        << trial_cell(r.theta_efs, !has_efs || (r.excluded_flags & kExcludedEllipseSpecific))
        << ','
        << trial_cell(r.theta_etr, !has_etr || (r.excluded_flags & kExcludedEllipseTrace)) << ','
        << trial_cell(r.theta_geo, !has_geo || (r.excluded_flags & kExcludedEllipseGeometric))
        << ',' << r.excluded_flags << '\n';
  }
  return out.str();
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw parse_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_key(cfg, key, value);
  }
  return cfg;
}

RunConfig load_run_config_file(const std::string& path) {
  return parse_run_config(read_file(path));
}

std::string run_config_echo(const RunConfig& cfg) {
  const RunSpec& base = cfg.sweep.base;
  std::ostringstream out;
  out << "n1 = " << base.config.n1 << "\n";
  out << "n2 = " << base.config.n2 << "\n";
  out << "tau = " << format_double17(base.config.tau) << "\n";
  out << "theta1 = " << format_double17(base.config.theta1) << "\n";
  out << "theta2 = " << format_double17(base.config.theta2) << "\n";
  out << "n_max = " << base.config.n_max << "\n";
  out << "m = " << base.m << "\n";
  out << "n_trials = " << base.n_trials << "\n";
  out << "master_seed = " << base.master_seed << "\n";
  out << "k_phi = " << base.k_phi << "\n";
  out << "threads = " << base.threads << "\n";
  out << "estimators = ";
  bool first = true;
  for (const Estimator e :
       {Estimator::ml, Estimator::ellipse_specific, Estimator::ellipse_trace,
        Estimator::ellipse_geometric}) {
    if (base.estimators.count(e) == 0) continue;
    if (!first) out << ",";
    out << estimator_name(e);
    first = false;
  }
  out << "\n";
  out << "sweep_axis = " << sweep_axis_name(cfg.sweep.axis) << "\n";
  out << "sweep_values = ";
  for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
    if (i) out << ",";
    out << format_double17(cfg.sweep.values[i]);
  }
  out << "\n";
  return out.str();
}

SimulateResult run_simulate(const RunConfig& cfg, const std::string& out_dir) {
  const RunSpec& base = cfg.sweep.base;
  base.config.validate();
  if (base.m < 1) throw validation_error("m: must be >= 1");
  std::filesystem::create_directories(out_dir);
  const auto table = build_table(base.config, base.k_phi);
  const ShotData data = sample_shots(base.config, *table, base.m, base.master_seed);
  SimulateResult result;
  result.csv_path = (std::filesystem::path(out_dir) / "shots.csv").string();
  result.sidecar_path = (std::filesystem::path(out_dir) / "shots.json").string();
  save_shots_csv(data, result.csv_path);
  save_shots_sidecar(base.config, data, table->k_phi(), result.sidecar_path);
  return result;
}

std::string run_estimate_json(const std::string& csv_path, const std::string& sidecar_path,
                              std::vector<std::string>* warnings) {
  LoadedShots loaded = load_shots(csv_path, sidecar_path);
  if (warnings) *warnings = loaded.warnings;
  const JointEstimate est = estimate(loaded.data);
  return joint_estimate_to_json(est, loaded.data);
}

std::string run_fisher_json(double theta, double sigma, std::size_t m, int n1, int n2,
                            double tau) {
  const FisherMatrix fim = fim_numeric(theta, sigma);
  const CrbMatrix c = crb(fim, m);
  ordered_json j;
  j["tool_version"] = kVersion;
  j["theta"] = theta;
  j["sigma"] = sigma;
  j["m"] = m;
  j["fim"] = ordered_json{{"f11", fim.f11},
                          {"f12", fim.f12},
                          {"f22", fim.f22},
                          {"grid_points", fim.grid_points},
                          {"est_error", fim.est_error},
                          {"converged", fim.converged}};
  j["crb"] = ordered_json{{"var_theta", c.var_theta},
                          {"var_sigma", c.var_sigma},
                          {"cov", c.cov},
                          {"dtheta", std::sqrt(c.var_theta)},
                          {"dsigma", std::sqrt(c.var_sigma)}};
  if (n1 >= 1 && n2 >= 1) {
    const AnalyticBounds b = analytic_bounds(sigma, m, n1, n2, tau);
    j["analytic_bounds"] = ordered_json{
        {"dtheta", b.dtheta},
        {"dsigma", b.dsigma},
        {"dtau", b.tau_unbounded ? ordered_json(nullptr) : ordered_json(b.dtau)},
        {"dtau_approx", b.dtau_approx},
        {"tau_unbounded", b.tau_unbounded}};
  } else {
    const AnalyticBounds b = analytic_bounds(sigma, m, 1, 1, 0.0);
    j["analytic_bounds"] =
        ordered_json{{"dtheta", b.dtheta}, {"dsigma", b.dsigma}};
  }
  return j.dump(2) + "\n";
}

BenchmarkResult run_benchmark(const RunConfig& cfg, const std::string& out_dir) {
  cfg.sweep.validate();
  std::filesystem::create_directories(out_dir);
  const std::vector<SweepPoint> points = sweep(cfg.sweep);

  BenchmarkResult result;
  result.echo_path = (std::filesystem::path(out_dir) / "config_echo.cfg").string();
  write_file(result.echo_path, run_config_echo(cfg));

  ordered_json j;
  j["tool_version"] = kVersion;
  j["config_echo"] = run_config_echo(cfg);
  j["sweep_axis"] = sweep_axis_name(cfg.sweep.axis);
  ordered_json results = ordered_json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& p = points[i];
    ordered_json entry;
    entry["value"] = p.value;
    if (p.failed) {
      entry["failed"] = true;
      entry["error"] = p.error;
    } else {
      char name[32];
      std::snprintf(name, sizeof(name), "trials_%03zu.csv", i);
      const std::string csv_path = (std::filesystem::path(out_dir) / name).string();
      write_file(csv_path, trials_csv(p.stats));
      result.trial_csv_paths.push_back(csv_path);
      entry["failed"] = false;
      entry["trials_csv"] = name;
      entry["stats"] = stats_json(p.stats);
    }
    results.push_back(std::move(entry));
  }
  j["results"] = std::move(results);

  result.summary_path = (std::filesystem::path(out_dir) / "summary.json").string();
  write_file(result.summary_path, j.dump(2) + "\n");
  return result;
}

}  // namespace difint
