#pragma once

// Baseline differential-phase extraction by conic fitting: the
// ellipse-specific algebraic fit (generalized eigenproblem with 4ac-b^2 = 1),
// the trace-constrained linear least squares (a+c = 1, may return a
// non-ellipse), and an orthogonal-distance geometric fit.

#include "difint/joint_distribution.hpp"

namespace difint {

enum class FitMethod { algebraic_ellipse_specific, algebraic_trace, geometric };

struct ConicCoeffs {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0, f = 0.0;
  FitMethod fit_method = FitMethod::algebraic_ellipse_specific;
  bool converged = false;
  double rms_residual = 0.0;  // algebraic residual (algebraic fits) or
                              // orthogonal distance (geometric fit)

  bool is_ellipse() const { return 4.0 * a * c - b * b > 0.0; }
};

// Least squares on the design vectors (z1^2, z1 z2, z2^2, z1, z2, 1) under
// the ellipse constraint 4ac - b^2 = 1. Needs m >= 6 non-collinear points.
ConicCoeffs fit_algebraic_ellipse_specific(const ShotData& data);

// Same residual under the linear constraint a + c = 1; a hyperbola result is
// reported through converged = false rather than raised.
ConicCoeffs fit_algebraic_trace(const ShotData& data);

// Damped Gauss-Newton on (center, semi-axes, tilt) minimizing the sum of
// squared orthogonal distances, started from a valid ellipse.
ConicCoeffs fit_geometric(const ShotData& data, const ConicCoeffs& init);

// arccos(-b / (2 sqrt(ac))) in [0, pi]; arguments overshooting +-1 by up to
// 1e-12 are clipped.
double theta_from_conic(const ConicCoeffs& conic);

// Root-mean-square orthogonal distance from the data to a conic that must be
// an ellipse. Shared by the geometric fit and its evaluation in tests.
double rms_orthogonal_distance(const ConicCoeffs& conic, const ShotData& data);

}  // namespace difint
