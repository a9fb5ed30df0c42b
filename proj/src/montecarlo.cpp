#include "difint/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "difint/ellipse_fit.hpp"
#include "difint/errors.hpp"
#include "difint/rng.hpp"

namespace difint {

namespace {

SummaryStats summarize(const std::vector<TrialRecord>& trials, double TrialRecord::*field,
                       unsigned excluded_bit, double truth) {
  SummaryStats s;
  double sum = 0.0;
  for (const auto& t : trials) {
    if (t.excluded_flags & excluded_bit) {
      ++s.n_excluded;
      continue;
    }
    ++s.n_used;
    sum += t.*field;
  }
  if (s.n_used == 0) return s;
  s.mean = sum / s.n_used;
  double ss = 0.0;
  for (const auto& t : trials) {
    if (t.excluded_flags & excluded_bit) continue;
    const double d = t.*field - s.mean;
    ss += d * d;
  }
  s.stddev = s.n_used > 1 ? std::sqrt(ss / (s.n_used - 1)) : 0.0;
  s.bias = s.mean - truth;
  s.se_mean = s.stddev / std::sqrt(static_cast<double>(s.n_used));
  s.se_std = s.n_used > 1 ? s.stddev / std::sqrt(2.0 * (s.n_used - 1)) : 0.0;
  return s;
}

Histogram histogram_of(const std::vector<TrialRecord>& trials, double TrialRecord::*field,
                       unsigned excluded_bit, std::size_t bins = 25) {
  Histogram h;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& t : trials) {
    if (t.excluded_flags & excluded_bit) continue;
    const double v = t.*field;
    if (first) {
      lo = hi = v;
      first = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (first) return h;
  if (hi <= lo) hi = lo + 1e-12;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  for (const auto& t : trials) {
    if (t.excluded_flags & excluded_bit) continue;
    const double x = (t.*field - lo) / (hi - lo);
    const std::size_t bin =
        std::min(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
    ++h.counts[bin];
  }
  return h;
}

}  // namespace

std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::ml: return "ml";
    case Estimator::ellipse_specific: return "efs";
    case Estimator::ellipse_trace: return "etr";
    case Estimator::ellipse_geometric: return "geo";
  }
  return "?";
}

std::optional<Estimator> estimator_from_name(const std::string& name) {
  if (name == "ml") return Estimator::ml;
  if (name == "efs") return Estimator::ellipse_specific;
  if (name == "etr") return Estimator::ellipse_trace;
  if (name == "geo") return Estimator::ellipse_geometric;
  return std::nullopt;
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::total_particles: return "n_total";
    case SweepAxis::theta_true: return "theta";
    case SweepAxis::tau_true: return "tau";
    case SweepAxis::shots: return "m";
  }
  return "?";
}

std::optional<SweepAxis> sweep_axis_from_name(const std::string& name) {
  if (name == "none") return SweepAxis::none;
  if (name == "n_total") return SweepAxis::total_particles;
  if (name == "theta") return SweepAxis::theta_true;
  if (name == "tau") return SweepAxis::tau_true;
  if (name == "m") return SweepAxis::shots;
  return std::nullopt;
}

void RunSpec::validate() const {
  config.validate();
  if (m < 2) throw validation_error("m: must be >= 2");
  if (n_trials < 1) throw validation_error("n_trials: must be >= 1");
  if (estimators.empty()) throw validation_error("estimators: must name at least one");
  if (threads < 0) throw validation_error("threads: must be >= 0");
}

void SweepSpec::validate() const {
  base.validate();
  if (axis != SweepAxis::none && values.empty())
    throw validation_error("sweep_values: must be nonempty");
  for (double v : values) {
    if (!std::isfinite(v)) throw validation_error("sweep_values: must be finite");
    if ((axis == SweepAxis::total_particles || axis == SweepAxis::shots) &&
        (v < 2.0 || v != std::floor(v)))
      throw validation_error("sweep_values: must be integers >= 2 for this axis");
    if (axis == SweepAxis::tau_true && v < 0.0)
      throw validation_error("sweep_values: tau must be >= 0");
  }
}

RunSpec apply_sweep_value(const SweepSpec& spec, double value) {
  RunSpec out = spec.base;
  switch (spec.axis) {
    case SweepAxis::none:
      break;
    case SweepAxis::total_particles: {
      const long total = std::lround(value);
      out.config.n1 = static_cast<int>(total / 2);
      out.config.n2 = static_cast<int>(total - total / 2);
      break;
    }
    case SweepAxis::theta_true:
      out.config.theta1 = value;
      out.config.theta2 = 0.0;
      break;
    case SweepAxis::tau_true:
      out.config.tau = value;
      break;
    case SweepAxis::shots:
      out.m = static_cast<std::size_t>(std::lround(value));
      break;
  }
  return out;
}

TrialStatistics run_trials(const RunSpec& spec) {
  spec.validate();
  const auto t_start = std::chrono::steady_clock::now();

  TrialStatistics stats;
  stats.spec = spec;
  stats.theta_true = spec.config.theta();
  stats.sigma_true = std::sqrt(spec.config.sigma_true_sq());
  stats.trials.assign(spec.n_trials, TrialRecord{});

  const auto table = build_table(spec.config, spec.k_phi);

  const bool want_ml = spec.estimators.count(Estimator::ml) > 0;
  const bool want_efs = spec.estimators.count(Estimator::ellipse_specific) > 0;
  const bool want_etr = spec.estimators.count(Estimator::ellipse_trace) > 0;
  const bool want_geo = spec.estimators.count(Estimator::ellipse_geometric) > 0;

  const auto run_one = [&](std::size_t t) {
    TrialRecord& rec = stats.trials[t];
    const std::uint64_t seed = SplitMix64::derive_stream(spec.master_seed, t);
    const ShotData data = sample_shots(spec.config, *table, spec.m, seed);
    if (want_ml) {
      try {
        const JointEstimate est = estimate(data);
        rec.theta_ml = est.theta_est;
        rec.sigma_ml = est.sigma_est;
        rec.tau_ml = est.tau_est_analytic;
        rec.tau_ml_exact = est.tau_est_exact;
        if (!std::isfinite(est.theta_est) || !std::isfinite(est.sigma_est))
          rec.excluded_flags |= kExcludedMl;
      } catch (const std::exception&) {
        rec.excluded_flags |= kExcludedMl;
      }
    }
    ConicCoeffs efs;
    bool have_efs = false;
    if (want_efs || want_geo) {
      try {
        efs = fit_algebraic_ellipse_specific(data);
        have_efs = efs.converged && efs.is_ellipse();
        if (have_efs) rec.theta_efs = theta_from_conic(efs);
      } catch (const std::exception&) {
        have_efs = false;
      }
      if (!have_efs) rec.excluded_flags |= kExcludedEllipseSpecific;
    }
    if (want_etr) {
      bool ok = false;
      try {
        const ConicCoeffs etr = fit_algebraic_trace(data);
        if (etr.converged && etr.is_ellipse()) {
          rec.theta_etr = theta_from_conic(etr);
          ok = true;
        }
      } catch (const std::exception&) {
      }
      if (!ok) rec.excluded_flags |= kExcludedEllipseTrace;
    }
    if (want_geo) {
      bool ok = false;
      if (have_efs) {
        try {
          const ConicCoeffs geo = fit_geometric(data, efs);
          if (geo.converged && geo.is_ellipse()) {
            rec.theta_geo = theta_from_conic(geo);
            ok = true;
          }
        } catch (const std::exception&) {
        }
      }
      if (!ok) rec.excluded_flags |= kExcludedEllipseGeometric;
    }
  };

  unsigned n_workers = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, spec.n_trials);
  if (n_workers <= 1) {
    for (std::size_t t = 0; t < spec.n_trials; ++t) run_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
      workers.emplace_back([&]() {
        for (std::size_t t = next.fetch_add(1); t < spec.n_trials; t = next.fetch_add(1))
          run_one(t);
      });
    }
    for (auto& th : workers) th.join();
  }

  const double sigma_truth = stats.sigma_true;
  if (want_ml) {
    stats.summary["theta_ml"] =
        summarize(stats.trials, &TrialRecord::theta_ml, kExcludedMl, stats.theta_true);
    stats.summary["sigma_ml"] =
        summarize(stats.trials, &TrialRecord::sigma_ml, kExcludedMl, sigma_truth);
    stats.summary["tau_ml"] =
        summarize(stats.trials, &TrialRecord::tau_ml, kExcludedMl, spec.config.tau);
    stats.summary["tau_ml_exact"] =
        summarize(stats.trials, &TrialRecord::tau_ml_exact, kExcludedMl, spec.config.tau);
    stats.histograms["theta_ml"] = histogram_of(stats.trials, &TrialRecord::theta_ml, kExcludedMl);
    stats.histograms["sigma_ml"] = histogram_of(stats.trials, &TrialRecord::sigma_ml, kExcludedMl);
    stats.histograms["tau_ml"] = histogram_of(stats.trials, &TrialRecord::tau_ml, kExcludedMl);
  }
  if (want_efs) {
    stats.summary["theta_efs"] = summarize(stats.trials, &TrialRecord::theta_efs,
                                           kExcludedEllipseSpecific, stats.theta_true);
    stats.histograms["theta_efs"] =
        histogram_of(stats.trials, &TrialRecord::theta_efs, kExcludedEllipseSpecific);
  }
  if (want_etr) {
    stats.summary["theta_etr"] =
        summarize(stats.trials, &TrialRecord::theta_etr, kExcludedEllipseTrace, stats.theta_true);
    stats.histograms["theta_etr"] =
        histogram_of(stats.trials, &TrialRecord::theta_etr, kExcludedEllipseTrace);
  }
  if (want_geo) {
    stats.summary["theta_geo"] = summarize(stats.trials, &TrialRecord::theta_geo,
                                           kExcludedEllipseGeometric, stats.theta_true);
    stats.histograms["theta_geo"] =
        histogram_of(stats.trials, &TrialRecord::theta_geo, kExcludedEllipseGeometric);
  }

  stats.bounds = analytic_bounds(sigma_truth, spec.m, spec.config.n1, spec.config.n2,
                                 spec.config.tau);
  try {
    stats.fim = fim_numeric(stats.theta_true, sigma_truth);
    const CrbMatrix c = crb(stats.fim, spec.m);
    stats.crb_dtheta = std::sqrt(c.var_theta);
    stats.crb_dsigma = std::sqrt(c.var_sigma);
    stats.crb_valid = stats.fim.converged;
  } catch (const std::exception&) {
    stats.crb_valid = false;
  }

  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return stats;
}

std::vector<SweepPoint> sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<double> values = spec.values;
  if (spec.axis == SweepAxis::none) values = {0.0};
  std::vector<SweepPoint> out;
  out.reserve(values.size());
  for (double v : values) {
    SweepPoint point;
    point.value = v;
    try {
      point.stats = run_trials(apply_sweep_value(spec, v));
    } catch (const std::exception& ex) {
      point.failed = true;
      point.error = ex.what();
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace difint
