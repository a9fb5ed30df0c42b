#pragma once

// Per-shot Fisher information of the four-term model over (theta, sigma) by
// tensor Gauss-Legendre quadrature with order doubling, the closed-form 2x2
// Cramer-Rao inverse, and the small-noise analytic bounds.

#include <cstddef>
#include <utility>
#include <vector>

namespace difint {

struct FisherMatrix {
  double f11 = 0.0;  // theta-theta
  double f12 = 0.0;  // theta-sigma
  double f22 = 0.0;  // sigma-sigma
  int grid_points = 0;     // per-axis order at the final refinement
  double est_error = 0.0;  // last relative change, scaled by max(|f11|,|f22|)
  bool converged = false;
};

FisherMatrix fim_numeric(double theta, double sigma, double rel_tol = 1e-6,
                         int max_order = 2048);

struct CrbMatrix {
  double var_theta = 0.0;
  double var_sigma = 0.0;
  double cov = 0.0;
};

// F^{-1}/m via the closed-form 2x2 inverse; throws on a singular matrix.
CrbMatrix crb(const FisherMatrix& fim, std::size_t m);

struct AnalyticBounds {
  double dtheta = 0.0;       // sigma / sqrt(m)
  double dsigma = 0.0;       // sigma / sqrt(2m)
  double dtau = 0.0;         // sigma^2 / ((N1+N2) tau sqrt(2m))
  double dtau_approx = 0.0;  // tau / sqrt(2m)
  bool tau_unbounded = false;
  bool small_sigma_regime = true;  // sigma < 0.5
};

AnalyticBounds analytic_bounds(double sigma, std::size_t m, int n1, int n2, double tau);

// Nodes and weights on [-1, 1]; cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order);

}  // namespace difint
