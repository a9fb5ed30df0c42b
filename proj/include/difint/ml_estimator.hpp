#pragma once

// Joint maximum-likelihood estimation of (theta, sigma) from paired shots,
// and conversion of sigma to the interaction parameter tau through the
// small-noise closed form and the exact spin-variance relation.

#include <cstddef>

#include "difint/gaussian_model.hpp"
#include "difint/joint_distribution.hpp"

namespace difint {

struct JointEstimate {
  double theta_est = 0.0;
  double sigma_est = 0.0;
  double tau_est_analytic = 0.0;
  double tau_est_exact = 0.0;
  double log_likelihood_at_max = 0.0;
  bool converged = false;
  bool clamped_tau = false;      // sigma_est below the projection-noise floor
  bool tau_range_flag = false;   // exact inversion hit the top of its bracket
  bool degenerate_data = false;  // all shots identical
  int n_function_evals = 0;
};

struct EstimateOptions {
  int grid_theta = 41;
  int grid_sigma = 41;
  double sigma_min = 1e-4;
  double sigma_max = 5.0;
  double param_tol = 1e-7;
  double grad_tol = 1e-6;
  int max_simplex_iter = 500;
  int max_newton_iter = 60;
};

// Maximizes the shot log-likelihood over [0, pi] x [sigma_min, sigma_max]
// with a coarse grid scan (ties toward smaller theta), simplex refinement
// and a Newton polish on the analytic score.
JointEstimate estimate(const ShotData& data, const EstimateOptions& options = {});

// Small-noise variance 1/N1 + 1/N2 + (N1+N2) tau^2.
double sigma_model_sq(int n1, int n2, double tau);

// Exact variance (4/N1^2) Var(Jy; N1, tau) + (4/N2^2) Var(Jy; N2, tau).
double sigma_exact_sq(int n1, int n2, double tau);

struct TauInversion {
  double tau = 0.0;
  bool clamped = false;       // sigma below the tau = 0 floor, clipped to 0
  bool out_of_range = false;  // sigma above the invertible range (exact form)
};

// Inverts the small-noise variance relation for tau.
TauInversion tau_from_sigma_analytic(double sigma_est, int n1, int n2);

// Inverts the exact variance relation by bisection; tolerance 1e-10 in tau.
TauInversion tau_from_sigma_exact(double sigma_est, int n1, int n2);

}  // namespace difint
