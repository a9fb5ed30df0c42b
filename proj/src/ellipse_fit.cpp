#include "difint/ellipse_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "difint/errors.hpp"

namespace difint {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

Vec3 matvec(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i] += m[i][j] * v[j];
  return r;
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Mat3 inverse3(const Mat3& m) {
  Mat3 adj;
  adj[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  adj[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
  adj[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  adj[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  adj[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
  adj[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
  adj[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  adj[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
  adj[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
  double scale = 0.0;
  for (const auto& row : m)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (std::abs(det) < 1e-12 * std::max(scale * scale * scale, 1e-30))
    throw degenerate_data_error("design matrix is rank deficient (collinear or repeated data)");
  Mat3 inv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) inv[i][j] = adj[i][j] / det;
  return inv;
}

// Real roots of x^3 + a2 x^2 + a1 x + a0.
int cubic_real_roots(double a2, double a1, double a0, double roots[3]) {
  const double p = a1 - a2 * a2 / 3.0;
  const double q = a0 - a2 * a1 / 3.0 + 2.0 * a2 * a2 * a2 / 27.0;
  const double shift = -a2 / 3.0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    const double r = -0.5 * q + std::sqrt(disc);
    const double s = -0.5 * q - std::sqrt(disc);
    const double u = std::cbrt(r) + std::cbrt(s);
    roots[0] = u + shift;
    return 1;
  }
  // Three real roots (trigonometric form).
  const double mp = std::sqrt(std::max(-p / 3.0, 0.0));
  if (mp == 0.0) {
    roots[0] = shift;
    return 1;
  }
  double arg = 3.0 * q / (2.0 * p * mp);
  arg = std::clamp(arg, -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  for (int k = 0; k < 3; ++k)
    roots[k] = 2.0 * mp * std::cos(phi - 2.0 * M_PI * k / 3.0) + shift;
  return 3;
}

// Null-space direction of (M - lambda I) via the most independent row pair.
Vec3 eigenvector_for(const Mat3& m, double lambda) {
  Mat3 a = m;
  for (int i = 0; i < 3; ++i) a[i][i] -= lambda;
  Vec3 best{};
  double best_norm = -1.0;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& pr : pairs) {
    const auto& r1 = a[pr[0]];
    const auto& r2 = a[pr[1]];
    const Vec3 cr = {r1[1] * r2[2] - r1[2] * r2[1], r1[2] * r2[0] - r1[0] * r2[2],
                     r1[0] * r2[1] - r1[1] * r2[0]};
    const double n = cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2];
    if (n > best_norm) {
      best_norm = n;
      best = cr;
    }
  }
  const double n = std::sqrt(best[0] * best[0] + best[1] * best[1] + best[2] * best[2]);
  if (n == 0.0) throw numeric_error("eigenvector extraction failed");
  return {best[0] / n, best[1] / n, best[2] / n};
}

struct Moments {
  Mat3 s1{}, s2{}, s3{};
};

Moments scatter_moments(const ShotData& data) {
  Moments mo;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data.z1[i];
    const double y = data.z2[i];
    const Vec3 q = {x * x, x * y, y * y};
    const Vec3 l = {x, y, 1.0};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        mo.s1[r][c] += q[r] * q[c];
        mo.s2[r][c] += q[r] * l[c];
        mo.s3[r][c] += l[r] * l[c];
      }
  }
  return mo;
}

void check_fit_preconditions(const ShotData& data) {
  if (data.size() < 6) throw validation_error("m: conic fits need at least 6 shots");
}

double algebraic_rms(const ConicCoeffs& v, const ShotData& data) {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data.z1[i];
    const double y = data.z2[i];
    const double r = v.a * x * x + v.b * x * y + v.c * y * y + v.d * x + v.e * y + v.f;
    acc += r * r;
  }
  return std::sqrt(acc / data.size());
}

// Gaussian elimination with partial pivoting for the small dense systems.
void solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-14)
      throw degenerate_data_error("normal equations are singular");
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * b[c];
    b[r] = acc / a[r * n + r];
  }
}

struct EllipseGeometry {
  double xc = 0.0, yc = 0.0;
  double ra = 1.0, rb = 1.0;  // semi-axes along the rotated x/y directions
  double tilt = 0.0;
};

EllipseGeometry conic_to_geometry(const ConicCoeffs& v) {
  const double det = 4.0 * v.a * v.c - v.b * v.b;
  if (!(det > 0.0)) throw validation_error("conic: not an ellipse (4ac - b^2 <= 0)");
  EllipseGeometry g;
  g.xc = (v.b * v.e - 2.0 * v.c * v.d) / det;
  g.yc = (v.b * v.d - 2.0 * v.a * v.e) / det;
  const double f0 =
      v.a * g.xc * g.xc + v.b * g.xc * g.yc + v.c * g.yc * g.yc + v.d * g.xc + v.e * g.yc + v.f;
  g.tilt = 0.5 * std::atan2(v.b, v.a - v.c);
  const double cos2 = std::cos(2.0 * g.tilt);
  const double sin2 = std::sin(2.0 * g.tilt);
  const double mean = 0.5 * (v.a + v.c);
  const double diff = 0.5 * (v.a - v.c) * cos2 + 0.5 * v.b * sin2;
  const double lam1 = mean + diff;  // quadratic form along the tilted x axis
  const double lam2 = mean - diff;
  if (!(lam1 * (-f0) > 0.0) || !(lam2 * (-f0) > 0.0))
    throw validation_error("conic: degenerate or imaginary ellipse");
  g.ra = std::sqrt(-f0 / lam1);
  g.rb = std::sqrt(-f0 / lam2);
  return g;
}

ConicCoeffs geometry_to_conic(const EllipseGeometry& g, FitMethod method) {
  const double cs = std::cos(g.tilt);
  const double sn = std::sin(g.tilt);
  const double ira = 1.0 / (g.ra * g.ra);
  const double irb = 1.0 / (g.rb * g.rb);
  ConicCoeffs v;
  v.a = cs * cs * ira + sn * sn * irb;
  v.b = 2.0 * cs * sn * (ira - irb);
  v.c = sn * sn * ira + cs * cs * irb;
  v.d = -2.0 * v.a * g.xc - v.b * g.yc;
  v.e = -v.b * g.xc - 2.0 * v.c * g.yc;
  v.f = v.a * g.xc * g.xc + v.b * g.xc * g.yc + v.c * g.yc * g.yc - 1.0;
  const double norm = std::sqrt(v.a * v.a + v.b * v.b + v.c * v.c + v.d * v.d + v.e * v.e + v.f * v.f);
  const double sign = (v.a + v.c) > 0.0 ? 1.0 : -1.0;
  const double scale = sign / norm;
  v.a *= scale;
  v.b *= scale;
  v.c *= scale;
  v.d *= scale;
  v.e *= scale;
  v.f *= scale;
  v.fit_method = method;
  return v;
}

// Closest point on the axis-aligned ellipse (ra, rb) to (p, q), both folded
// nonnegative. Solves F(t) = (ra p/(t+ra^2))^2 + (rb q/(t+rb^2))^2 - 1 = 0,
// strictly decreasing on (-min(ra,rb)^2, inf).
struct FramePoint {
  double x = 0.0, y = 0.0;
};

FramePoint closest_point_quadrant(double ra, double rb, double p, double q) {
  if (p == 0.0 && q == 0.0) return rb <= ra ? FramePoint{0.0, rb} : FramePoint{ra, 0.0};
  if (q == 0.0) {
    const double crit = (ra * ra - rb * rb) / ra;
    if (ra > rb && p < crit) {
      const double x = ra * ra * p / (ra * ra - rb * rb);
      return {x, rb * std::sqrt(std::max(0.0, 1.0 - (x / ra) * (x / ra)))};
    }
    return {ra, 0.0};
  }
  if (p == 0.0) {
    const double crit = (rb * rb - ra * ra) / rb;
    if (rb > ra && q < crit) {
      const double y = rb * rb * q / (rb * rb - ra * ra);
      return {ra * std::sqrt(std::max(0.0, 1.0 - (y / rb) * (y / rb))), y};
    }
    return {0.0, rb};
  }
  const double min_sq = std::min(ra * ra, rb * rb);
  double lo = -min_sq + (ra <= rb ? ra * p : rb * q);  // F(lo) >= 0
  double hi = -min_sq + std::hypot(ra * p, rb * q);    // F(hi) <= 0
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 120; ++iter) {
    const double u = ra * p / (t + ra * ra);
    const double v = rb * q / (t + rb * rb);
    const double fval = u * u + v * v - 1.0;
    if (std::abs(fval) < 1e-15) break;
    if (fval > 0.0)
      lo = t;
    else
      hi = t;
    const double fder = -2.0 * (u * u / (t + ra * ra) + v * v / (t + rb * rb));
    double t_new = t - fval / fder;
    if (!(t_new > lo && t_new < hi)) t_new = 0.5 * (lo + hi);
    if (t_new == t) break;
    t = t_new;
  }
  return {ra * ra * p / (t + ra * ra), rb * rb * q / (t + rb * rb)};
}

struct DistanceInfo {
  double distance = 0.0;
  double ux = 0.0, uy = 0.0;  // unit vector data point <- ellipse point (world)
  double cu = 0.0, su = 0.0;  // nearest-point parameter cosine/sine
};

DistanceInfo point_distance(const EllipseGeometry& g, double px, double py) {
  const double cs = std::cos(g.tilt);
  const double sn = std::sin(g.tilt);
  const double dx = px - g.xc;
  const double dy = py - g.yc;
  double p = cs * dx + sn * dy;
  double q = -sn * dx + cs * dy;
  const double sp = p < 0.0 ? -1.0 : 1.0;
  const double sq = q < 0.0 ? -1.0 : 1.0;
  const FramePoint cp = closest_point_quadrant(g.ra, g.rb, std::abs(p), std::abs(q));
  const double ex = sp * cp.x;
  const double ey = sq * cp.y;
  DistanceInfo info;
  info.distance = std::hypot(p - ex, q - ey);
  info.cu = ex / g.ra;
  info.su = ey / g.rb;
  if (info.distance > 0.0) {
    const double fx = (p - ex) / info.distance;  // frame components
    const double fy = (q - ey) / info.distance;
    info.ux = cs * fx - sn * fy;
    info.uy = sn * fx + cs * fy;
  }
  return info;
}

double sum_sq_distances(const EllipseGeometry& g, const ShotData& data) {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const DistanceInfo info = point_distance(g, data.z1[i], data.z2[i]);
    acc += info.distance * info.distance;
  }
  return acc;
}

}  // namespace

ConicCoeffs fit_algebraic_ellipse_specific(const ShotData& data) {
  check_fit_preconditions(data);
  const Moments mo = scatter_moments(data);
  // Reduced generalized eigenproblem with the ellipse constraint baked into
  // C1; see the block decomposition of the scatter matrix.
  Mat3 s2t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s2t[i][j] = mo.s2[j][i];
  const Mat3 s3_inv = inverse3(mo.s3);
  Mat3 t_mat = matmul(s3_inv, s2t);
  for (auto& row : t_mat)
    for (auto& x : row) x = -x;
  const Mat3 reduced = matmul(mo.s2, t_mat);
  Mat3 m;
  for (int j = 0; j < 3; ++j) {
    m[0][j] = 0.5 * (mo.s1[2][j] + reduced[2][j]);
    m[1][j] = -(mo.s1[1][j] + reduced[1][j]);
    m[2][j] = 0.5 * (mo.s1[0][j] + reduced[0][j]);
  }
  const double tr = m[0][0] + m[1][1] + m[2][2];
  const double minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] -
                        m[0][2] * m[2][0] + m[1][1] * m[2][2] - m[1][2] * m[2][1];
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  double roots[3];
  const int n_roots = cubic_real_roots(-tr, minors, -det, roots);

  Vec3 a1{};
  double best_cond = 0.0;
  bool found = false;
  for (int k = 0; k < n_roots; ++k) {
    const Vec3 v = eigenvector_for(m, roots[k]);
    const double cond = 4.0 * v[0] * v[2] - v[1] * v[1];
    if (cond > best_cond) {
      best_cond = cond;
      a1 = v;
      found = true;
    }
  }
  if (!found) throw degenerate_data_error("no ellipse solution (degenerate data)");
  const Vec3 a2 = matvec(t_mat, a1);

  ConicCoeffs v;
  const double scale = 1.0 / std::sqrt(best_cond);  // enforce 4ac - b^2 = 1
  v.a = a1[0] * scale;
  v.b = a1[1] * scale;
  v.c = a1[2] * scale;
  v.d = a2[0] * scale;
  v.e = a2[1] * scale;
  v.f = a2[2] * scale;
  v.fit_method = FitMethod::algebraic_ellipse_specific;
  v.converged = true;
  v.rms_residual = algebraic_rms(v, data);
  return v;
}

ConicCoeffs fit_algebraic_trace(const ShotData& data) {
  check_fit_preconditions(data);
  // With c = 1 - a the residual is linear in (a, b, d, e, f):
  // a (z1^2 - z2^2) + b z1 z2 + d z1 + e z2 + f = -z2^2.
  std::vector<double> normal(25, 0.0), rhs(5, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data.z1[i];
    const double y = data.z2[i];
    const double row[5] = {x * x - y * y, x * y, x, y, 1.0};
    const double target = -y * y;
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) normal[r * 5 + c] += row[r] * row[c];
      rhs[r] += row[r] * target;
    }
  }
  solve_dense(normal, rhs, 5);
  ConicCoeffs v;
  v.a = rhs[0];
  v.b = rhs[1];
  v.c = 1.0 - rhs[0];
  v.d = rhs[2];
  v.e = rhs[3];
  v.f = rhs[4];
  v.fit_method = FitMethod::algebraic_trace;
  v.converged = v.is_ellipse();
  v.rms_residual = algebraic_rms(v, data);
  return v;
}

ConicCoeffs fit_geometric(const ShotData& data, const ConicCoeffs& init) {
  check_fit_preconditions(data);
  if (!init.is_ellipse()) throw validation_error("init: starting conic must be an ellipse");
  EllipseGeometry g = conic_to_geometry(init);

  const std::size_t m = data.size();
  double current = sum_sq_distances(g, data);
  double lambda = 1e-3;
  bool converged = false;
  std::vector<double> jtj(25), jtr(5);
  for (int iter = 0; iter < 200; ++iter) {
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    const double cs = std::cos(g.tilt);
    const double sn = std::sin(g.tilt);
    for (std::size_t i = 0; i < m; ++i) {
      const DistanceInfo info = point_distance(g, data.z1[i], data.z2[i]);
      if (info.distance <= 0.0) continue;
      // Derivative of the distance w.r.t. the ellipse parameters equals the
      // (negated) projection of the ellipse-point velocity on the outward
      // unit vector; the nearest-point parameter drops out at the optimum.
      const double dxa = cs * info.cu, dya = sn * info.cu;          // d(point)/d(ra)
      const double dxb = -sn * info.su, dyb = cs * info.su;         // d(point)/d(rb)
      const double vx = -sn * g.ra * info.cu - cs * g.rb * info.su; // d(point)/d(tilt)
      const double vy = cs * g.ra * info.cu - sn * g.rb * info.su;
      const double row[5] = {-info.ux, -info.uy, -(info.ux * dxa + info.uy * dya),
                             -(info.ux * dxb + info.uy * dyb), -(info.ux * vx + info.uy * vy)};
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) jtj[r * 5 + c] += row[r] * row[c];
        jtr[r] += row[r] * info.distance;
      }
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      std::vector<double> lhs = jtj;
      for (int r = 0; r < 5; ++r) lhs[r * 5 + r] += lambda * std::max(jtj[r * 5 + r], 1e-12);
      std::vector<double> step = jtr;
      for (auto& s : step) s = -s;
      try {
        solve_dense(lhs, step, 5);
      } catch (const degenerate_data_error&) {
        lambda *= 10.0;
        continue;
      }
      EllipseGeometry trial = g;
      trial.xc += step[0];
      trial.yc += step[1];
      trial.ra += step[2];
      trial.rb += step[3];
      trial.tilt += step[4];
      if (!(trial.ra > 0.0) || !(trial.rb > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double trial_cost = sum_sq_distances(trial, data);
      if (trial_cost <= current) {
        const double step_norm = std::max({std::abs(step[0]), std::abs(step[1]),
                                           std::abs(step[2]), std::abs(step[3]),
                                           std::abs(step[4])});
        g = trial;
        current = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (step_norm < 1e-10) {
          converged = true;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (converged || !stepped) break;
  }

  if (!converged) {
    // A stalled line search at the cost floor is convergence, not failure:
    // accept when the undamped normal-equation step is already negligible.
    std::vector<double> lhs = jtj;
    std::vector<double> step = jtr;
    for (auto& s : step) s = -s;
    try {
      solve_dense(lhs, step, 5);
      double norm = 0.0;
      for (double s : step) norm = std::max(norm, std::abs(s));
      converged = norm < 1e-7;
    } catch (const degenerate_data_error&) {
    }
  }

  ConicCoeffs out = geometry_to_conic(g, FitMethod::geometric);
  out.converged = converged && out.is_ellipse();
  out.rms_residual = std::sqrt(current / m);
  return out;
}

double theta_from_conic(const ConicCoeffs& conic) {
  if (!(conic.a * conic.c > 0.0))
    throw validation_error("conic: a*c must be positive to extract a phase");
  double arg = -conic.b / (2.0 * std::sqrt(conic.a * conic.c));
  if (std::abs(arg) > 1.0 + 1e-12)
    throw validation_error("conic: phase argument outside [-1, 1]");
  arg = std::clamp(arg, -1.0, 1.0);
  return std::acos(arg);
}

double rms_orthogonal_distance(const ConicCoeffs& conic, const ShotData& data) {
  if (data.size() == 0) throw validation_error("m: need at least one shot");
  const EllipseGeometry g = conic_to_geometry(conic);
  return std::sqrt(sum_sq_distances(g, data) / data.size());
}

}  // namespace difint
