#include "difint/ml_estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "difint/errors.hpp"

namespace difint {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Objective {
  const ShotData& data;
  const EstimateOptions& opt;
  int evals = 0;

  bool in_box(double theta, double sigma) const {
    return theta >= 0.0 && theta <= M_PI && sigma >= opt.sigma_min && sigma <= opt.sigma_max;
  }

  double operator()(double theta, double sigma) {
    ++evals;
    if (!in_box(theta, sigma)) return kNegInf;
    double acc = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j)
      acc += ps_eval(data.s1[j], data.s2[j], theta, sigma).log_density;
    return acc;
  }

  Gradient2 gradient(double theta, double sigma) const {
    Gradient2 g;
    for (std::size_t j = 0; j < data.size(); ++j) {
      const PsEval e = ps_eval(data.s1[j], data.s2[j], theta, sigma);
      g.dtheta += e.dlog_dtheta;
      g.dsigma += e.dlog_dsigma;
    }
    return g;
  }
};

struct Point {
  double theta, sigma, value;
};

// Nelder-Mead on (theta, sigma), maximizing; out-of-box vertices score -inf.
Point simplex_refine(Objective& f, Point start, double step_theta, double step_sigma) {
  std::array<Point, 3> v;
  v[0] = start;
  const auto make = [&](double t, double s) -> Point {
    t = std::clamp(t, 0.0, M_PI);
    s = std::clamp(s, f.opt.sigma_min, f.opt.sigma_max);
    return {t, s, f(t, s)};
  };
  v[1] = make(start.theta + step_theta, start.sigma);
  v[2] = make(start.theta, start.sigma + step_sigma);

  for (int iter = 0; iter < f.opt.max_simplex_iter; ++iter) {
    std::sort(v.begin(), v.end(), [](const Point& a, const Point& b) { return a.value > b.value; });
    const double spread =
        std::max(std::abs(v[0].theta - v[2].theta), std::abs(v[0].sigma - v[2].sigma));
    if (spread < 0.1 * f.opt.param_tol) break;

    const double ct = 0.5 * (v[0].theta + v[1].theta);
    const double cs = 0.5 * (v[0].sigma + v[1].sigma);
    Point refl = make(ct + (ct - v[2].theta), cs + (cs - v[2].sigma));
    if (refl.value > v[0].value) {
      Point expd = make(ct + 2.0 * (ct - v[2].theta), cs + 2.0 * (cs - v[2].sigma));
      v[2] = expd.value > refl.value ? expd : refl;
    } else if (refl.value > v[1].value) {
      v[2] = refl;
    } else {
      const Point& base = refl.value > v[2].value ? refl : v[2];
      Point contr = make(ct + 0.5 * (base.theta - ct), cs + 0.5 * (base.sigma - cs));
      if (contr.value > base.value) {
        v[2] = contr;
      } else {  // shrink toward the best vertex
        v[1] = make(v[0].theta + 0.5 * (v[1].theta - v[0].theta),
                    v[0].sigma + 0.5 * (v[1].sigma - v[0].sigma));
        v[2] = make(v[0].theta + 0.5 * (v[2].theta - v[0].theta),
                    v[0].sigma + 0.5 * (v[2].sigma - v[0].sigma));
      }
    }
  }
  std::sort(v.begin(), v.end(), [](const Point& a, const Point& b) { return a.value > b.value; });
  return v[0];
}

struct Hessian2 {
  double h11 = 0.0, h12 = 0.0, h22 = 0.0;
  bool negative_definite = false;
};

// Central differences of the analytic score.
Hessian2 fd_hessian(Objective& f, double theta, double sigma) {
  const double ht = 1e-6;
  const double hs = 1e-6 * std::max(1.0, sigma);
  const Gradient2 gtp = f.gradient(theta + ht, sigma);
  const Gradient2 gtm = f.gradient(theta - ht, sigma);
  const Gradient2 gsp = f.gradient(theta, sigma + hs);
  const Gradient2 gsm = f.gradient(theta, sigma - hs);
  f.evals += 4;
  Hessian2 h;
  h.h11 = (gtp.dtheta - gtm.dtheta) / (2.0 * ht);
  h.h12 = 0.5 * ((gtp.dsigma - gtm.dsigma) / (2.0 * ht) + (gsp.dtheta - gsm.dtheta) / (2.0 * hs));
  h.h22 = (gsp.dsigma - gsm.dsigma) / (2.0 * hs);
  h.negative_definite = h.h11 < 0.0 && h.h11 * h.h22 - h.h12 * h.h12 > 0.0;
  return h;
}

// Newton polish on the analytic score; the Hessian comes from central
// differences of the gradient. Returns the best point visited.
Point newton_polish(Objective& f, Point start, bool* stationary) {
  Point best = start;
  *stationary = false;
  double theta = start.theta, sigma = start.sigma;
  for (int iter = 0; iter < f.opt.max_newton_iter; ++iter) {
    const Gradient2 g = f.gradient(theta, sigma);
    if (std::hypot(g.dtheta, g.dsigma) < 0.1 * f.opt.grad_tol) break;
    const Hessian2 h = fd_hessian(f, theta, sigma);
    double dt, ds;
    if (h.negative_definite) {
      const double det = h.h11 * h.h22 - h.h12 * h.h12;
      dt = -(h.h22 * g.dtheta - h.h12 * g.dsigma) / det;
      ds = -(h.h11 * g.dsigma - h.h12 * g.dtheta) / det;
    } else {  // fall back to a scaled ascent step
      const double scale = sigma * sigma / std::max<std::size_t>(f.data.size(), 1);
      dt = scale * g.dtheta;
      ds = scale * g.dsigma;
    }
    bool improved = false;
    for (int half = 0; half < 25; ++half) {
      const double t_new = std::clamp(theta + dt, 0.0, M_PI);
      const double s_new = std::clamp(sigma + ds, f.opt.sigma_min, f.opt.sigma_max);
      const double val = f(t_new, s_new);
      if (val > best.value) {
        best = {t_new, s_new, val};
        theta = t_new;
        sigma = s_new;
        improved = true;
        break;
      }
      dt *= 0.5;
      ds *= 0.5;
      if (std::abs(dt) < 1e-16 && std::abs(ds) < 1e-16) break;
    }
    if (!improved) break;
  }

  // Near the maximum the objective comparisons sit at the rounding floor
  // while the analytic score is still exact; finish on the score itself.
  theta = best.theta;
  sigma = best.sigma;
  Gradient2 g = f.gradient(theta, sigma);
  double gnorm = std::hypot(g.dtheta, g.dsigma);
  for (int iter = 0; iter < 16 && gnorm >= 0.05 * f.opt.grad_tol; ++iter) {
    const Hessian2 h = fd_hessian(f, theta, sigma);
    if (!h.negative_definite) break;
    const double det = h.h11 * h.h22 - h.h12 * h.h12;
    const double t_new =
        std::clamp(theta - (h.h22 * g.dtheta - h.h12 * g.dsigma) / det, 0.0, M_PI);
    const double s_new = std::clamp(sigma - (h.h11 * g.dsigma - h.h12 * g.dtheta) / det,
                                    f.opt.sigma_min, f.opt.sigma_max);
    const Gradient2 g_new = f.gradient(t_new, s_new);
    const double gnorm_new = std::hypot(g_new.dtheta, g_new.dsigma);
    ++f.evals;
    if (gnorm_new >= gnorm) break;
    theta = t_new;
    sigma = s_new;
    g = g_new;
    gnorm = gnorm_new;
  }
  const double final_value = f(theta, sigma);
  best = {theta, sigma, std::max(final_value, best.value)};
  *stationary = gnorm < f.opt.grad_tol;
  return best;
}

}  // namespace

double sigma_model_sq(int n1, int n2, double tau) {
  if (n1 < 1) throw validation_error("n1: must be >= 1");
  if (n2 < 1) throw validation_error("n2: must be >= 1");
  return 1.0 / n1 + 1.0 / n2 + (n1 + n2) * tau * tau;
}

double sigma_exact_sq(int n1, int n2, double tau) {
  const double v1 = spin::jy_variance(n1, tau);
  const double v2 = spin::jy_variance(n2, tau);
  return 4.0 * v1 / (static_cast<double>(n1) * n1) + 4.0 * v2 / (static_cast<double>(n2) * n2);
}

TauInversion tau_from_sigma_analytic(double sigma_est, int n1, int n2) {
  if (!(sigma_est > 0.0)) throw validation_error("sigma_est: must be > 0");
  TauInversion out;
  const double radicand =
      sigma_est * sigma_est / (static_cast<double>(n1) + n2) - 1.0 / (static_cast<double>(n1) * n2);
  if (radicand <= 0.0) {
    out.tau = 0.0;
    out.clamped = true;
  } else {
    out.tau = std::sqrt(radicand);
  }
  return out;
}

TauInversion tau_from_sigma_exact(double sigma_est, int n1, int n2) {
  if (!(sigma_est > 0.0)) throw validation_error("sigma_est: must be > 0");
  TauInversion out;
  const double target = sigma_est * sigma_est;
  const double floor = sigma_exact_sq(n1, n2, 0.0);
  if (target <= floor) {
    out.tau = 0.0;
    out.clamped = true;
    return out;
  }
  // Grow the bracket while the variance keeps rising; it is increasing on
  // [0, ~pi/2] and saturates beyond.
  double lo = 0.0, hi = 1e-3;
  double f_hi = sigma_exact_sq(n1, n2, hi);
  while (f_hi < target) {
    const double next = hi * 2.0;
    const double f_next = sigma_exact_sq(n1, n2, next);
    if (f_next <= f_hi || next > M_PI) {
      out.tau = hi;
      out.out_of_range = true;
      return out;
    }
    lo = hi;
    f_hi = f_next;
    hi = next;
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (sigma_exact_sq(n1, n2, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  out.tau = 0.5 * (lo + hi);
  return out;
}

JointEstimate estimate(const ShotData& data, const EstimateOptions& options) {
  if (data.size() < 2) throw validation_error("m: need at least 2 shots");
  if (data.n1 < 1 || data.n2 < 1)
    throw validation_error("n1/n2: shot data does not carry particle numbers");
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (!(std::abs(data.z1[j]) <= 1.0)) throw validation_error("z1: |z| must be <= 1");
    if (!(std::abs(data.z2[j]) <= 1.0)) throw validation_error("z2: |z| must be <= 1");
  }

  JointEstimate est;
  Objective obj{data, options};

  bool identical = true;
  for (std::size_t j = 1; j < data.size() && identical; ++j)
    identical = data.s1[j] == data.s1[0] && data.s2[j] == data.s2[0];

  Point best{0.0, options.sigma_min, kNegInf};
  if (identical) {
    // Degenerate sample: the likelihood climbs without bound as sigma falls,
    // so pin sigma at its floor and read theta off the matching branch.
    est.degenerate_data = true;
    const double theta0 = std::clamp(std::abs(data.s1[0] - data.s2[0]), 0.0, M_PI);
    best = {theta0, options.sigma_min, obj(theta0, options.sigma_min)};
  } else {
    const double log_lo = std::log(options.sigma_min);
    const double log_hi = std::log(options.sigma_max);
    for (int i = 0; i < options.grid_theta; ++i) {
      const double theta = M_PI * i / (options.grid_theta - 1);
      for (int j = 0; j < options.grid_sigma; ++j) {
        const double sigma = std::exp(log_lo + (log_hi - log_lo) * j / (options.grid_sigma - 1));
        const double val = obj(theta, sigma);
        if (val > best.value) best = {theta, sigma, val};  // ties keep smaller theta
      }
    }
    const double step_theta = 0.5 * M_PI / (options.grid_theta - 1);
    const double step_sigma =
        best.sigma * (std::exp(0.5 * (log_hi - log_lo) / (options.grid_sigma - 1)) - 1.0);
    Point refined = simplex_refine(obj, best, step_theta, step_sigma);
    if (refined.value > best.value) best = refined;
    bool stationary = false;
    // the polish reports the stationary point; its value field already keeps
    // the running maximum, so adopt it unconditionally
    best = newton_polish(obj, best, &stationary);
    est.converged = stationary;
  }

  est.theta_est = best.theta;
  est.sigma_est = best.sigma;
  est.log_likelihood_at_max = best.value;
  est.n_function_evals = obj.evals;

  const TauInversion analytic = tau_from_sigma_analytic(best.sigma, data.n1, data.n2);
  const TauInversion exact = tau_from_sigma_exact(best.sigma, data.n1, data.n2);
  est.tau_est_analytic = analytic.tau;
  est.tau_est_exact = exact.tau;
  est.clamped_tau = analytic.clamped && exact.clamped;
  est.tau_range_flag = exact.out_of_range;
  return est;
}

}  // namespace difint
