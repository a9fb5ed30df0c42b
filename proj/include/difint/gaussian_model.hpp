#pragma once

// Classical surrogate of the joint distribution: uniform common phase plus
// wrapped-Gaussian uncorrelated noise. On the arcsine variables the density
// is a four-term sum of wrapped Gaussians; everything here is evaluated in
// log space so likelihoods stay finite deep in the tails.

#include <array>
#include <cstddef>

#include "difint/joint_distribution.hpp"

namespace difint {

struct GaussianModelParams {
  double theta = 0.0;  // differential phase, [0, pi]
  double sigma = 0.1;  // uncorrelated noise width, > 0
};

// Wrapped normal density sum_k phi(chi + 2*pi*k; sigma); truncation error
// below 1e-14 relative. Integrates to 1 over any length-2*pi window.
double wrapped_gaussian_pdf(double chi, double sigma);

// Log density of the four-term model and its score. All four Gaussian
// arguments shift with theta by +1, which gives the compact score forms.
struct PsEval {
  double log_density = 0.0;
  double dlog_dtheta = 0.0;
  double dlog_dsigma = 0.0;
};
PsEval ps_eval(double s1, double s2, double theta, double sigma);

double ps_log_density(double s1, double s2, const GaussianModelParams& params);
double ps_density(double s1, double s2, const GaussianModelParams& params);

// Density on the raw outcomes; |z| = 1 is excluded (Jacobian singularity).
double pz_density(double z1, double z2, const GaussianModelParams& params);

double log_likelihood(const ShotData& data, const GaussianModelParams& params);

struct Gradient2 {
  double dtheta = 0.0;
  double dsigma = 0.0;
};
Gradient2 grad_log_likelihood(const ShotData& data, const GaussianModelParams& params);

// Corners A, B, C, D of the sigma -> 0 support rectangle in (s1, s2).
std::array<std::array<double, 2>, 4> rectangle_edges(double theta);

}  // namespace difint
