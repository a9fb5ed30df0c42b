// Acceptance suite: one pass/fail line per criterion, with the measured
// values printed next to their targets. Statistical comparisons carry an
// explicit 3x standard-error slack, printed alongside the raw numbers.
// Run all criteria with no arguments, or pass criterion numbers to select.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "difint/ellipse_fit.hpp"
#include "difint/fisher_crb.hpp"
#include "difint/gaussian_model.hpp"
#include "difint/io.hpp"
#include "difint/ml_estimator.hpp"
#include "difint/montecarlo.hpp"
#include "difint/run_config.hpp"
#include "difint/rng.hpp"
#include "oracle_dense.hpp"

using namespace difint;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 1;

struct SubCheck {
  bool pass = false;
  std::string detail;
};

struct CriterionResult {
  int index = 0;
  std::string title;
  std::vector<SubCheck> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// Cached Monte Carlo runs shared between criteria.
class RunCache {
 public:
  const TrialStatistics& get(double theta, double tau, std::size_t m,
                             bool with_ellipse_fits) {
    std::ostringstream key;
    key << theta << "/" << tau << "/" << m << "/" << with_ellipse_fits;
    auto it = cache_.find(key.str());
    if (it != cache_.end()) return it->second;

    RunSpec spec;
    spec.config = {1000, 1000, tau, theta, 0.0};
    spec.m = m;
    spec.n_trials = 1000;
    spec.master_seed = kMasterSeed;
    spec.estimators = {Estimator::ml};
    if (with_ellipse_fits) {
      spec.estimators.insert(Estimator::ellipse_specific);
      spec.estimators.insert(Estimator::ellipse_trace);
      spec.estimators.insert(Estimator::ellipse_geometric);
    }
    auto [pos, inserted] = cache_.emplace(key.str(), run_trials(spec));
    (void)inserted;
    return pos->second;
  }

 private:
  std::map<std::string, TrialStatistics> cache_;
};

RunCache g_runs;

// ---- criterion 1: CRB saturation ------------------------------------------

CriterionResult criterion_1() {
  CriterionResult r{1, "CRB saturation: std(theta_est) vs sigma_true/sqrt(m)", {}};
  const auto t0 = std::chrono::steady_clock::now();
  for (double tau : {0.0, 0.005}) {
    const TrialStatistics& st = g_runs.get(0.5 * M_PI, tau, 100, false);
    const SummaryStats& s = st.summary.at("theta_ml");
    const double target = st.sigma_true / 10.0;
    const double ratio = s.stddev / target;
    SubCheck c;
    c.pass = std::abs(ratio - 1.0) <= 0.15;
    c.detail = fmt("tau=%.3f: std=%.4e target=%.4e ratio=%.4f (tolerance 15%%)", tau, s.stddev,
                   target, ratio);
    r.checks.push_back(c);

    // the sample variance must not undercut the numeric bound
    if (st.crb_valid) {
      const double var_ratio = (s.stddev * s.stddev) / (st.crb_dtheta * st.crb_dtheta);
      const double slack = 3.0 * 2.0 * s.se_std / st.crb_dtheta;  // d(var)/var ~ 2 d(std)/std
      SubCheck dom;
      dom.pass = var_ratio >= 0.85 - slack;
      dom.detail = fmt("tau=%.3f: var/CRB_num=%.3f >= 0.85 (3SE slack %.3f)", tau, var_ratio,
                       slack);
      r.checks.push_back(dom);
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  SubCheck timing;
  timing.pass = wall < 300.0;
  timing.detail = fmt("runtime %.1f s (< 300 s)", wall);
  r.checks.push_back(timing);
  return r;
}

// ---- criterion 2: sigma estimation ----------------------------------------

CriterionResult criterion_2() {
  CriterionResult r{2, "sigma estimation: std(sigma_est) vs sigma_true/sqrt(2m)", {}};
  for (double tau : {0.0, 0.005}) {
    const TrialStatistics& st = g_runs.get(0.5 * M_PI, tau, 100, false);
    const SummaryStats& s = st.summary.at("sigma_ml");
    const double target = st.sigma_true / std::sqrt(200.0);
    const double ratio = s.stddev / target;
    SubCheck c;
    c.pass = std::abs(ratio - 1.0) <= 0.20;
    c.detail = fmt("tau=%.3f: std=%.4e target=%.4e ratio=%.4f (tolerance 20%%)", tau, s.stddev,
                   target, ratio);
    r.checks.push_back(c);
  }
  return r;
}

// ---- criterion 3: flatness in theta ----------------------------------------

CriterionResult criterion_3() {
  CriterionResult r{3, "theta-flatness of std(theta_est) over [0.15 pi, 0.85 pi]", {}};
  double lo = 1e300, hi = 0.0;
  std::ostringstream values;
  for (int k = 0; k < 8; ++k) {
    const double theta = (0.15 + 0.1 * k) * M_PI;
    const TrialStatistics& st = g_runs.get(theta, 0.005, 100, false);
    const double sd = st.summary.at("theta_ml").stddev;
    lo = std::min(lo, sd);
    hi = std::max(hi, sd);
    values << fmt(" %.4e", sd);
  }
  const double variation = (hi - lo) / lo;
  SubCheck c;
  c.pass = variation < 0.20;
  c.detail = fmt("variation (max-min)/min = %.4f (< 0.20); std per theta:%s", variation,
                 values.str().c_str());
  r.checks.push_back(c);
  return r;
}

// ---- criterion 4: negligible bias ------------------------------------------

CriterionResult criterion_4() {
  CriterionResult r{4, "negligible bias: |mean(theta_est) - theta_true| < 0.2 CRB", {}};
  for (double tau : {0.0, 0.005}) {
    for (int k = 0; k < 9; ++k) {
      const double theta = (0.1 + 0.1 * k) * M_PI;
      const TrialStatistics& st = g_runs.get(theta, tau, 100, false);
      const SummaryStats& s = st.summary.at("theta_ml");
      const double crb = st.sigma_true / 10.0;
      const double slack = 3.0 * s.se_mean;
      SubCheck c;
      c.pass = std::abs(s.bias) < 0.2 * crb + slack;
      c.detail = fmt("tau=%.3f theta=%.2fpi: |bias|=%.3e vs 0.2*CRB=%.3e (3SE slack %.1e)", tau,
                     theta / M_PI, std::abs(s.bias), 0.2 * crb, slack);
      r.checks.push_back(c);
    }
  }
  return r;
}

// ---- criterion 5: tau estimation -------------------------------------------

CriterionResult criterion_5() {
  CriterionResult r{5, "tau estimation and the two variance inversions", {}};
  const TrialStatistics& st = g_runs.get(0.5 * M_PI, 0.005, 100, false);
  const SummaryStats& ta = st.summary.at("tau_ml");
  const SummaryStats& te = st.summary.at("tau_ml_exact");

  const double target = 0.005 / std::sqrt(200.0);
  SubCheck spread;
  spread.pass = std::abs(ta.stddev / target - 1.0) <= 0.25;
  spread.detail = fmt("std(tau_est)=%.4e target=%.4e ratio=%.4f (tolerance 25%%)", ta.stddev,
                      target, ta.stddev / target);
  r.checks.push_back(spread);

  SubCheck agree;
  const double rel = std::abs(ta.mean - te.mean) / te.mean;
  agree.pass = rel < 0.02;
  agree.detail = fmt("inversions at tau_true=0.005: mean(analytic)=%.5e mean(exact)=%.5e "
                     "rel diff=%.4f (< 0.02)",
                     ta.mean, te.mean, rel);
  r.checks.push_back(agree);

  // Deterministic check of the same agreement on the exact forward variance.
  const double sigma_small = std::sqrt(sigma_exact_sq(1000, 1000, 0.005));
  const double tau_a = tau_from_sigma_analytic(sigma_small, 1000, 1000).tau;
  const double tau_e = tau_from_sigma_exact(sigma_small, 1000, 1000).tau;
  SubCheck det;
  det.pass = std::abs(tau_a - tau_e) / tau_e < 0.02;
  det.detail = fmt("forward sigma at tau=0.005: analytic inversion %.5e vs exact %.5e "
                   "(rel %.4f < 0.02)",
                   tau_a, tau_e, std::abs(tau_a - tau_e) / tau_e);
  r.checks.push_back(det);

  // Divergence by tau = 0.05: the small-noise variance keeps growing while
  // the exact one saturates.
  const double sigma_big = std::sqrt(sigma_exact_sq(1000, 1000, 0.05));
  const double tau_a_big = tau_from_sigma_analytic(sigma_big, 1000, 1000).tau;
  SubCheck diverge;
  const double rel_big = std::abs(tau_a_big - 0.05) / 0.05;
  diverge.pass = rel_big > 0.10;
  diverge.detail = fmt("at tau=0.05 the analytic inversion returns %.4e (rel. gap %.2f > 0.10)",
                       tau_a_big, rel_big);
  r.checks.push_back(diverge);
  return r;
}

// ---- criteria 6 and 7: ellipse-fit comparison ------------------------------

CriterionResult criterion_6() {
  CriterionResult r{6, "geometric-fit uncertainty gap over the numeric CRB", {}};
  for (double tau : {0.005, 0.0}) {
    const double lo = tau > 0.0 ? 1.05 : 1.20;
    const double hi = tau > 0.0 ? 1.35 : 1.60;
    for (std::size_t m : {std::size_t{100}, std::size_t{1000}}) {
      const TrialStatistics& st = g_runs.get(0.3 * M_PI, tau, m, true);
      const SummaryStats& geo = st.summary.at("theta_geo");
      const double ratio = geo.stddev / st.crb_dtheta;
      const double se_ratio = geo.se_std / st.crb_dtheta;
      SubCheck c;
      c.pass = st.crb_valid && ratio >= lo - 3.0 * se_ratio && ratio <= hi + 3.0 * se_ratio;
      c.detail = fmt("tau=%.3f m=%zu: std(geo)/CRB=%.4f in [%.2f, %.2f] (3SE slack %.3f, "
                     "%zu/%zu fits excluded)",
                     tau, m, ratio, lo, hi, 3.0 * se_ratio, geo.n_excluded, st.spec.n_trials);
      r.checks.push_back(c);
    }
  }
  return r;
}

CriterionResult criterion_7() {
  CriterionResult r{7, "bias ordering: ML bias below the geometric fit and the spread", {}};
  for (std::size_t m : {std::size_t{100}, std::size_t{1000}}) {
    const TrialStatistics& st = g_runs.get(0.3 * M_PI, 0.005, m, true);
    const SummaryStats& ml = st.summary.at("theta_ml");
    const SummaryStats& geo = st.summary.at("theta_geo");

    SubCheck order;
    const double slack_order = 3.0 * (ml.se_mean + 0.3 * geo.se_mean);
    order.pass = std::abs(ml.bias) <= 0.3 * std::abs(geo.bias) + slack_order;
    order.detail = fmt("m=%zu: |bias(ml)|=%.3e vs 0.3*|bias(geo)|=%.3e (3SE slack %.1e)", m,
                       std::abs(ml.bias), 0.3 * std::abs(geo.bias), slack_order);
    r.checks.push_back(order);

    SubCheck small;
    const double slack_small = 3.0 * ml.se_mean;
    small.pass = std::abs(ml.bias) < 0.05 * ml.stddev + slack_small;
    small.detail = fmt("m=%zu: |bias(ml)|=%.3e vs 0.05*std=%.3e (3SE slack %.1e)", m,
                       std::abs(ml.bias), 0.05 * ml.stddev, slack_small);
    r.checks.push_back(small);
  }
  return r;
}

// ---- criterion 8: quantum vs Gaussian model --------------------------------

CriterionResult criterion_8() {
  CriterionResult r{8, "model agreement: total variation quantum vs Gaussian on the lattice", {}};
  const int n = 1000;
  std::vector<double> s_mid(n + 1), width(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double z = (2.0 * i - n) / static_cast<double>(n);
    s_mid[i] = std::asin(z);
    const double z_lo = std::max(-1.0, z - 1.0 / n);
    const double z_hi = std::min(1.0, z + 1.0 / n);
    width[i] = std::asin(z_hi) - std::asin(z_lo);
  }
  for (double tau : {0.0, 0.005}) {
    InterferometerConfig cfg{n, n, tau, 0.3 * M_PI, 0.0};
    const auto table = build_table(cfg);
    const auto quantum = joint_pmf(*table);
    const GaussianModelParams params{cfg.theta(), std::sqrt(cfg.sigma_true_sq())};
    double tv = 0.0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        tv += std::abs(quantum[i][j] -
                       ps_density(s_mid[i], s_mid[j], params) * width[i] * width[j]);
    tv *= 0.5;
    SubCheck c;
    c.pass = tv < 0.05;
    c.detail = fmt("tau=%.3f: TV distance %.4f (< 0.05)", tau, tv);
    r.checks.push_back(c);
  }
  return r;
}

// ---- criterion 9: oracle suites ---------------------------------------------

CriterionResult criterion_9() {
  CriterionResult r{9, "oracle suites", {}};
  const auto t0 = std::chrono::steady_clock::now();

  {  // dense-operator equivalence for the single-interferometer chain
    double worst = 0.0;
    for (int n = 1; n <= 12; ++n)
      for (double phi : {0.0, 0.3, 1.1, 2.9})
        for (double tau : {0.0, 0.02, 0.1}) {
          const auto p = spin::output_distribution(n, phi, tau);
          const auto q = oracle::output_distribution(n, phi, tau);
          double tv = 0.0;
          for (int i = 0; i <= n; ++i) tv += std::abs(p[i] - q[i]);
          worst = std::max(worst, 0.5 * tv);
        }
    SubCheck c;
    c.pass = worst < 1e-9;
    c.detail = fmt("spin-model dense equivalence, N <= 12: worst TV %.2e (< 1e-9)", worst);
    r.checks.push_back(c);
  }

  {  // joint distribution vs fine-grid integration for N <= 6
    double worst = 0.0;
    for (int n : {4, 6})
      for (double theta : {0.5 * M_PI, 0.77})
        for (double tau : {0.0, 0.04}) {
          InterferometerConfig cfg{n, n, tau, theta, 0.0};
          const auto table = build_table(cfg);
          const auto mine = joint_pmf(*table);
          const auto brute = oracle::joint_fine_grid(n, n, tau, theta, 0.0, 100000);
          for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
              worst = std::max(worst, std::abs(mine[i][j] - brute[i][j]));
        }
    SubCheck c;
    c.pass = worst < 1e-7;
    c.detail = fmt("joint density vs 1e5-point phase grid, N <= 6: worst |diff| %.2e (< 1e-7)",
                   worst);
    r.checks.push_back(c);
  }

  {  // analytic score vs central finite differences
    InterferometerConfig cfg{80, 80, 0.004, 0.45 * M_PI, 0.0};
    const auto table = build_table(cfg);
    SplitMix64 rng(17);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const ShotData data = sample_shots(cfg, *table, 30, 50 + trial);
      const double theta = rng.uniform(0.1 * M_PI, 0.9 * M_PI);
      const double sigma = rng.uniform(0.05, 1.2);
      const Gradient2 g = grad_log_likelihood(data, {theta, sigma});
      const double h = 1e-6;
      const double fd_t = (log_likelihood(data, {theta + h, sigma}) -
                           log_likelihood(data, {theta - h, sigma})) /
                          (2.0 * h);
      const double fd_s = (log_likelihood(data, {theta, sigma + h}) -
                           log_likelihood(data, {theta, sigma - h})) /
                          (2.0 * h);
      worst = std::max(worst, std::abs(g.dtheta - fd_t) / std::max(1.0, std::abs(fd_t)));
      worst = std::max(worst, std::abs(g.dsigma - fd_s) / std::max(1.0, std::abs(fd_s)));
    }
    SubCheck c;
    c.pass = worst < 1e-5;
    c.detail = fmt("score vs finite differences: worst rel. gap %.2e (< 1e-5)", worst);
    r.checks.push_back(c);
  }

  {  // information matrix against the small-noise diagonal at sigma = 0.02,
     // compared on the uncertainty scale sqrt(F_limit / F). The exact model
     // sits below the limit by ~0.98*sigma in the entries themselves (branch
     // crossings at the rectangle corners), which the entry-wise numbers
     // printed here show.
    const double sigma = 0.02;
    const FisherMatrix f = fim_numeric(0.5 * M_PI, sigma);
    const double gap_t = std::abs(std::sqrt(1.0 / (f.f11 * sigma * sigma)) - 1.0);
    const double gap_s = std::abs(std::sqrt(2.0 / (f.f22 * sigma * sigma)) - 1.0);
    SubCheck c;
    c.pass = f.converged && gap_t < 0.01 && gap_s < 0.01;
    c.detail = fmt("FIM vs diag(1/s^2, 2/s^2) at sigma=0.02, uncertainty scale: "
                   "dtheta gap %.4f, dsigma gap %.4f (< 0.01); entries f11*s^2=%.4f f22*s^2/2=%.4f",
                   gap_t, gap_s, f.f11 * sigma * sigma, 0.5 * f.f22 * sigma * sigma);
    r.checks.push_back(c);
  }

  {  // noiseless conic recovery for all three fit variants
    double worst = 0.0;
    for (double theta : {0.1 * M_PI, 0.3 * M_PI, 0.45 * M_PI, 0.8 * M_PI}) {
      ShotData data;
      data.n1 = data.n2 = 1000;
      for (int i = 0; i < 100; ++i) {
        const double eps = -M_PI + 2.0 * M_PI * (i + 0.37) / 100.0;
        data.z1.push_back(std::sin(eps + theta));
        data.z2.push_back(std::sin(eps));
        data.s1.push_back(std::asin(data.z1.back()));
        data.s2.push_back(std::asin(data.z2.back()));
      }
      const ConicCoeffs efs = fit_algebraic_ellipse_specific(data);
      worst = std::max(worst, std::abs(theta_from_conic(efs) - theta));
      worst = std::max(worst, std::abs(theta_from_conic(fit_algebraic_trace(data)) - theta));
      worst = std::max(worst, std::abs(theta_from_conic(fit_geometric(data, efs)) - theta));
    }
    SubCheck c;
    c.pass = worst < 1e-6;
    c.detail = fmt("noiseless ellipse recovery, three methods: worst |dtheta| %.2e (< 1e-6)",
                   worst);
    r.checks.push_back(c);
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  SubCheck timing;
  timing.pass = wall < 60.0;
  timing.detail = fmt("oracle suites runtime %.1f s (< 60 s)", wall);
  r.checks.push_back(timing);
  return r;
}

// ---- criterion 10: benchmark determinism -----------------------------------

CriterionResult criterion_10() {
  CriterionResult r{10, "benchmark rerun from the config echo is byte-identical", {}};
  const fs::path base = fs::temp_directory_path() / "difint_acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);

  const RunConfig cfg = parse_run_config(
      "n1 = 30\nn2 = 30\ntau = 0.003\ntheta1 = 1.1\nm = 25\nn_trials = 8\n"
      "master_seed = 99\nestimators = ml,efs,etr,geo\nsweep_axis = m\nsweep_values = 25,50\n");
  const BenchmarkResult first = run_benchmark(cfg, (base / "a").string());
  const RunConfig echoed = load_run_config_file(first.echo_path);
  const BenchmarkResult second = run_benchmark(echoed, (base / "b").string());

  const auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool identical = slurp(first.summary_path) == slurp(second.summary_path) &&
                   slurp(first.echo_path) == slurp(second.echo_path) &&
                   first.trial_csv_paths.size() == second.trial_csv_paths.size();
  std::size_t files = 2;
  for (std::size_t i = 0; identical && i < first.trial_csv_paths.size(); ++i) {
    identical = slurp(first.trial_csv_paths[i]) == slurp(second.trial_csv_paths[i]);
    ++files;
  }
  files += first.trial_csv_paths.size();
  SubCheck c;
  c.pass = identical;
  c.detail = fmt("%zu result files compared byte-for-byte: %s", files,
                 identical ? "identical" : "DIFFER");
  r.checks.push_back(c);
  std::error_code ec;
  fs::remove_all(base, ec);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  std::map<int, std::function<CriterionResult()>> criteria = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
      {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
      {9, criterion_9}, {10, criterion_10}};

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [k, fn] : criteria) selected.insert(k);

  int failures = 0;
  for (int index : selected) {
    const auto it = criteria.find(index);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", index);
      return 64;
    }
    const CriterionResult result = it->second();
    std::printf("[%s] criterion %d: %s\n", result.pass() ? "PASS" : "FAIL", result.index,
                result.title.c_str());
    for (const auto& check : result.checks)
      std::printf("        %s %s\n", check.pass ? "ok  " : "FAIL", check.detail.c_str());
    std::fflush(stdout);
    if (!result.pass()) ++failures;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
