#include "difint/gaussian_model.hpp"

#include <cmath>
#include <string>

#include "difint/errors.hpp"

namespace difint {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kHalfPi = 0.5 * M_PI;
// Terms more than this far below the leading exponent are dropped; e^-45
// is ~3e-20 relative, far inside every stated tolerance.
constexpr double kExpCutoff = 45.0;

void check_sigma(double sigma) {
  if (!(sigma > 0.0)) throw validation_error("sigma: must be > 0");
}

void check_s(double s, const char* name) {
  if (!(std::abs(s) <= kHalfPi + 1e-12))
    throw validation_error(std::string(name) + ": must lie in [-pi/2, pi/2]");
}

struct TermAccumulator {
  double scale;     // common exponent offset M
  double inv_2ss;   // 1 / (2 sigma^2)
  double s0 = 0.0;  // sum of scaled Gaussians
  double s1 = 0.0;  // sum weighted by x
  double s2 = 0.0;  // sum weighted by x^2

  void add(double x) {
    const double e = -x * x * inv_2ss - scale;
    if (e < -kExpCutoff) return;
    const double w = std::exp(e);
    s0 += w;
    s1 += w * x;
    s2 += w * x * x;
  }

  // Wrapped sum over shifts of chi by full turns; chi comes in as the
  // principal value, so the images at +-2*pi*k fall off monotonically and
  // the loop stops at the first pair below the cutoff.
  void add_wrapped(double chi_principal) {
    add(chi_principal);
    for (int k = 1;; ++k) {
      const double hi = chi_principal + kTwoPi * k;
      const double lo = chi_principal - kTwoPi * k;
      if (-hi * hi * inv_2ss - scale < -kExpCutoff && -lo * lo * inv_2ss - scale < -kExpCutoff)
        break;
      add(hi);
      add(lo);
    }
  }
};

}  // namespace

double wrapped_gaussian_pdf(double chi, double sigma) {
  check_sigma(sigma);
  const double chi0 = std::remainder(chi, kTwoPi);
  const double inv_2ss = 0.5 / (sigma * sigma);
  double sum = std::exp(-chi0 * chi0 * inv_2ss);
  for (int k = 1;; ++k) {
    const double hi = chi0 + kTwoPi * k;
    const double lo = chi0 - kTwoPi * k;
    const double add = std::exp(-hi * hi * inv_2ss) + std::exp(-lo * lo * inv_2ss);
    sum += add;
    if (add < sum * 1e-17 || add == 0.0) break;
  }
  return sum / (sigma * std::sqrt(kTwoPi));
}

PsEval ps_eval(double s1, double s2, double theta, double sigma) {
  // The four inversion branches of the sinusoidal signal model.
  const double chi[4] = {theta - s1 + s2, theta + M_PI - s1 - s2, theta - M_PI + s1 + s2,
                         theta + s1 - s2};
  double principal[4];
  const double inv_2ss = 0.5 / (sigma * sigma);
  double m = -1e308;
  for (int i = 0; i < 4; ++i) {
    principal[i] = std::remainder(chi[i], kTwoPi);
    m = std::max(m, -principal[i] * principal[i] * inv_2ss);
  }

  TermAccumulator acc{m, inv_2ss};
  for (int i = 0; i < 4; ++i) acc.add_wrapped(principal[i]);

  PsEval out;
  // density = S0 * e^M / (2*pi * sigma * sqrt(2*pi))
  out.log_density = m + std::log(acc.s0) - std::log(kTwoPi) - std::log(sigma * std::sqrt(kTwoPi));
  const double ratio1 = acc.s1 / acc.s0;
  const double ratio2 = acc.s2 / acc.s0;
  out.dlog_dtheta = -ratio1 * 2.0 * inv_2ss;
  out.dlog_dsigma = ratio2 * 2.0 * inv_2ss / sigma - 1.0 / sigma;
  return out;
}

double ps_log_density(double s1, double s2, const GaussianModelParams& params) {
  check_sigma(params.sigma);
  check_s(s1, "s1");
  check_s(s2, "s2");
  return ps_eval(s1, s2, params.theta, params.sigma).log_density;
}

double ps_density(double s1, double s2, const GaussianModelParams& params) {
  return std::exp(ps_log_density(s1, s2, params));
}

double pz_density(double z1, double z2, const GaussianModelParams& params) {
  if (!(std::abs(z1) < 1.0)) throw validation_error("z1: density needs |z| < 1");
  if (!(std::abs(z2) < 1.0)) throw validation_error("z2: density needs |z| < 1");
  const double s1 = std::asin(z1);
  const double s2 = std::asin(z2);
  return ps_density(s1, s2, params) / (std::sqrt(1.0 - z1 * z1) * std::sqrt(1.0 - z2 * z2));
}

double log_likelihood(const ShotData& data, const GaussianModelParams& params) {
  check_sigma(params.sigma);
  double acc = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    check_s(data.s1[j], "s1");
    check_s(data.s2[j], "s2");
    acc += ps_eval(data.s1[j], data.s2[j], params.theta, params.sigma).log_density;
  }
  return acc;
}

Gradient2 grad_log_likelihood(const ShotData& data, const GaussianModelParams& params) {
  check_sigma(params.sigma);
  Gradient2 g;
  for (std::size_t j = 0; j < data.size(); ++j) {
    check_s(data.s1[j], "s1");
    check_s(data.s2[j], "s2");
    const PsEval e = ps_eval(data.s1[j], data.s2[j], params.theta, params.sigma);
    g.dtheta += e.dlog_dtheta;
    g.dsigma += e.dlog_dsigma;
  }
  return g;
}

std::array<std::array<double, 2>, 4> rectangle_edges(double theta) {
  if (!(theta >= -1e-12 && theta <= M_PI + 1e-12))
    throw validation_error("theta: must lie in [0, pi]");
  return {{{-kHalfPi + theta, -kHalfPi},
           {-kHalfPi, -kHalfPi + theta},
           {kHalfPi - theta, kHalfPi},
           {kHalfPi, kHalfPi - theta}}};
}

}  // namespace difint
