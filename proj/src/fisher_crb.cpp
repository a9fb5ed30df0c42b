#include "difint/fisher_crb.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "difint/errors.hpp"
#include "difint/gaussian_model.hpp"

namespace difint {

namespace {

std::pair<std::vector<double>, std::vector<double>> make_gauss_legendre(int order) {
  std::vector<double> x(order), w(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double z = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[order - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[order - 1 - i] = w[i];
  }
  return {std::move(x), std::move(w)};
}

struct FimEntries {
  double f11 = 0.0, f12 = 0.0, f22 = 0.0;
};

FimEntries fim_at_order(double theta, double sigma, int order) {
  const auto& [nodes, weights] = gauss_legendre(order);
  const double half = 0.5 * M_PI;
  FimEntries out;
  for (int i = 0; i < order; ++i) {
    const double s1 = half * nodes[i];
    const double w1 = half * weights[i];
    for (int j = 0; j < order; ++j) {
      const double s2 = half * nodes[j];
      const double w2 = half * weights[j];
      const PsEval e = ps_eval(s1, s2, theta, sigma);
      if (e.log_density < -690.0) continue;  // p < ~1e-300 carries no mass
      const double p = std::exp(e.log_density);
      const double w = w1 * w2 * p;
      out.f11 += w * e.dlog_dtheta * e.dlog_dtheta;
      out.f12 += w * e.dlog_dtheta * e.dlog_dsigma;
      out.f22 += w * e.dlog_dsigma * e.dlog_dsigma;
    }
  }
  return out;
}

}  // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order) {
  if (order < 1) throw validation_error("order: must be >= 1");
  static std::mutex cache_mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_gauss_legendre(order)).first;
  return it->second;
}

FisherMatrix fim_numeric(double theta, double sigma, double rel_tol, int max_order) {
  if (!(theta > 0.0 && theta < M_PI))
    throw validation_error("theta: must lie strictly inside (0, pi)");
  if (!(sigma >= 1e-3 && sigma <= 5.0))
    throw validation_error("sigma: quadrature supports [1e-3, 5]");

  FisherMatrix result;
  FimEntries prev = fim_at_order(theta, sigma, 16);
  for (int order = 32; order <= max_order; order *= 2) {
    const FimEntries cur = fim_at_order(theta, sigma, order);
    const double scale = std::max(std::abs(cur.f11), std::abs(cur.f22));
    const double change = std::max({std::abs(cur.f11 - prev.f11), std::abs(cur.f12 - prev.f12),
                                    std::abs(cur.f22 - prev.f22)}) /
                          (scale > 0.0 ? scale : 1.0);
    result.f11 = cur.f11;
    result.f12 = cur.f12;
    result.f22 = cur.f22;
    result.grid_points = order;
    result.est_error = change;
    if (change < rel_tol) {
      result.converged = true;
      break;
    }
    prev = cur;
  }
  return result;
}

CrbMatrix crb(const FisherMatrix& fim, std::size_t m) {
  if (m < 1) throw validation_error("m: must be >= 1");
  const double det = fim.f11 * fim.f22 - fim.f12 * fim.f12;
  if (!(fim.f11 > 0.0) || !(fim.f22 > 0.0) || !(det > 1e-12 * fim.f11 * fim.f22))
    throw numeric_error("fisher matrix is singular or not positive definite");
  CrbMatrix out;
  const double inv_m_det = 1.0 / (m * det);
  out.var_theta = fim.f22 * inv_m_det;
  out.var_sigma = fim.f11 * inv_m_det;
  out.cov = -fim.f12 * inv_m_det;
  return out;
}

AnalyticBounds analytic_bounds(double sigma, std::size_t m, int n1, int n2, double tau) {
  if (!(sigma > 0.0)) throw validation_error("sigma: must be > 0");
  if (m < 1) throw validation_error("m: must be >= 1");
  if (n1 < 1 || n2 < 1) throw validation_error("n1/n2: must be >= 1");
  if (tau < 0.0) throw validation_error("tau: must be >= 0");
  AnalyticBounds out;
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  const double sqrt_2m = std::sqrt(2.0 * static_cast<double>(m));
  out.dtheta = sigma / sqrt_m;
  out.dsigma = sigma / sqrt_2m;
  out.small_sigma_regime = sigma < 0.5;
  if (tau == 0.0) {
    out.tau_unbounded = true;
    out.dtau = std::numeric_limits<double>::infinity();
    out.dtau_approx = 0.0;
  } else {
    out.dtau = sigma * sigma / ((static_cast<double>(n1) + n2) * tau * sqrt_2m);
    out.dtau_approx = tau / sqrt_2m;
  }
  return out;
}

}  // namespace difint
