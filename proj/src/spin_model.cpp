#include "difint/spin_model.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "difint/errors.hpp"

namespace difint::spin {

namespace {

void check_n(int n_particles) {
  if (n_particles < 1) throw validation_error("n_particles: must be >= 1");
}

// Off-diagonal of Jx between basis indices i and i+1 for spin j = N/2.
inline double jx_offdiag(int n, int i) {
  return 0.5 * std::sqrt(static_cast<double>(i + 1) * static_cast<double>(n - i));
}

// One column of d(pi/2) = exp(-i*(pi/2)*Jy), which is the eigenvector of the
// tridiagonal Jx matrix with eigenvalue lambda = col - N/2. The three-term
// recurrence b[r-1] v[r-1] + b[r] v[r+1] = lambda v[r] is run from both ends
// toward the middle (each direction is run with the solution growing, where
// the recurrence is stable) and spliced. Naive factorial formulas overflow
// near N ~ 150; this construction is good to N in the thousands.
void rotation_column(int n, int col, double* out) {
  const int dim = n + 1;
  const double lambda = static_cast<double>(col) - 0.5 * n;
  const int mid = dim / 2;
  constexpr double kRescaleAt = 1e250;
  constexpr double kRescaleBy = 1e-250;

  // Left sweep: rows 0 .. min(mid+1, n).
  std::vector<double> left(dim, 0.0);
  const int left_top = std::min(mid + 1, n);
  left[0] = 1.0;
  if (dim > 1) left[1] = lambda * left[0] / jx_offdiag(n, 0);
  for (int r = 1; r < left_top; ++r) {
    left[r + 1] = (lambda * left[r] - jx_offdiag(n, r - 1) * left[r - 1]) / jx_offdiag(n, r);
    if (std::abs(left[r + 1]) > kRescaleAt) {
      for (int i = 0; i <= r + 1; ++i) left[i] *= kRescaleBy;
    }
  }

  // Right sweep: rows n .. max(mid-1, 0).
  std::vector<double> right(dim, 0.0);
  const int right_bottom = std::max(mid - 1, 0);
  right[n] = 1.0;
  if (dim > 1) right[n - 1] = lambda * right[n] / jx_offdiag(n, n - 1);
  for (int r = n - 1; r > right_bottom; --r) {
    right[r - 1] = (lambda * right[r] - jx_offdiag(n, r) * right[r + 1]) / jx_offdiag(n, r - 1);
    if (std::abs(right[r - 1]) > kRescaleAt) {
      for (int i = r - 1; i <= n; ++i) right[i] *= kRescaleBy;
    }
  }

  // Splice where both sweeps are available and well away from zero crossings.
  int best = -1;
  double best_mag = -1.0;
  for (int r = right_bottom; r <= left_top; ++r) {
    const double mag = std::min(std::abs(left[r]), std::abs(right[r]));
    if (mag > best_mag) {
      best_mag = mag;
      best = r;
    }
  }
  const double ratio = left[best] / right[best];
  for (int r = 0; r <= best; ++r) out[r] = left[r];
  for (int r = best + 1; r <= n; ++r) out[r] = ratio * right[r];

  double norm_sq = 0.0;
  for (int r = 0; r < dim; ++r) norm_sq += out[r] * out[r];
  const double inv_norm = 1.0 / std::sqrt(norm_sq);
  // Theory fixes the mu = -N/2 component positive; the left seed already is.
  for (int r = 0; r < dim; ++r) out[r] *= inv_norm;
}

// i^k for integer k (k may be negative).
inline std::complex<double> imag_unit_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

double SpinState::norm_sq() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

SpinState bs_state(int n_particles) {
  check_n(n_particles);
  const int dim = n_particles + 1;
  SpinState state;
  state.n_particles = n_particles;
  state.amplitudes.resize(dim);
  // sqrt of the binomial distribution, evaluated through lgamma so the tails
  // underflow gracefully instead of overflowing intermediate factorials.
  const double log_norm = std::lgamma(n_particles + 1.0);
  const double log_half = -0.5 * n_particles * std::log(2.0);
  double norm_sq = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double log_amp =
        0.5 * (log_norm - std::lgamma(i + 1.0) - std::lgamma(n_particles - i + 1.0)) + log_half;
    const double a = std::exp(log_amp);
    state.amplitudes[i] = a;
    norm_sq += a * a;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (auto& a : state.amplitudes) a *= inv;
  return state;
}

SpinState apply_phase_twist(SpinState state, double phase, double twist) {
  const int dim = state.n_particles + 1;
  for (int i = 0; i < dim; ++i) {
    const double mu = state.mu(i);
    const double angle = -(phase * mu + twist * mu * mu);
    state.amplitudes[i] *= std::complex<double>(std::cos(angle), std::sin(angle));
  }
  return state;
}

RotationHalfPi::RotationHalfPi(int n_particles) : n_(n_particles) {
  check_n(n_particles);
  const int dim = n_ + 1;
  d_.resize(static_cast<std::size_t>(dim) * dim);
  std::vector<double> col(dim);
  for (int c = 0; c < dim; ++c) {
    rotation_column(n_, c, col.data());
    for (int r = 0; r < dim; ++r) d_[static_cast<std::size_t>(r) * dim + c] = col[r];
  }
}

std::complex<double> RotationHalfPi::element(int row, int col) const {
  return imag_unit_pow(row - col) * d_[static_cast<std::size_t>(row) * dim() + col];
}

std::span<const double> RotationHalfPi::d_row(int row) const {
  return {d_.data() + static_cast<std::size_t>(row) * dim(), static_cast<std::size_t>(dim())};
}

void RotationHalfPi::apply(std::span<const std::complex<double>> in,
                           std::span<std::complex<double>> out) const {
  const int dim_ = dim();
  // M = D W D* with D = diag(i^r): phase the input, multiply by the real
  // matrix, phase the output.
  std::vector<std::complex<double>> scaled(dim_);
  for (int c = 0; c < dim_; ++c) scaled[c] = imag_unit_pow(-c) * in[c];
  for (int r = 0; r < dim_; ++r) {
    const double* row = d_.data() + static_cast<std::size_t>(r) * dim_;
    double re = 0.0, im = 0.0;
    for (int c = 0; c < dim_; ++c) {
      re += row[c] * scaled[c].real();
      im += row[c] * scaled[c].imag();
    }
    out[r] = imag_unit_pow(r) * std::complex<double>(re, im);
  }
}

std::shared_ptr<const RotationHalfPi> rotation_half_pi(int n_particles, int n_max) {
  check_n(n_particles);
  if (n_particles > n_max)
    throw capacity_error("n_particles: " + std::to_string(n_particles) +
                         " exceeds rotation capacity n_max = " + std::to_string(n_max));
  static std::mutex cache_mutex;
  static std::map<int, std::shared_ptr<const RotationHalfPi>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(n_particles);
  if (it != cache.end()) return it->second;
  auto rot = std::make_shared<const RotationHalfPi>(n_particles);
  cache.emplace(n_particles, rot);
  return rot;
}

std::vector<double> output_distribution(int n_particles, double phase, double twist, int n_max) {
  auto rot = rotation_half_pi(n_particles, n_max);
  SpinState state = apply_phase_twist(bs_state(n_particles), phase, twist);
  std::vector<std::complex<double>> rotated(n_particles + 1);
  rot->apply(state.amplitudes, rotated);
  std::vector<double> prob(n_particles + 1);
  double total = 0.0;
  for (int i = 0; i <= n_particles; ++i) {
    prob[i] = std::norm(rotated[i]);
    total += prob[i];
  }
  const double inv = 1.0 / total;
  for (auto& p : prob) p *= inv;
  return prob;
}

DephasingWidth dephasing_width(int n_particles, double twist) {
  check_n(n_particles);
  DephasingWidth w;
  w.value = 1.0 / n_particles + n_particles * twist * twist;
  w.valid = w.value <= 0.5;
  return w;
}

double jy_variance(int n_particles, double twist) {
  check_n(n_particles);
  const double n = n_particles;
  if (twist == 0.0) return 0.25 * n;
  const double a = 1.0 - std::pow(std::cos(2.0 * twist), n_particles - 2);
  const double b = 4.0 * std::sin(twist) * std::pow(std::cos(twist), n_particles - 2);
  const double delta = 0.5 * std::atan2(b, a);
  return 0.25 * n * (1.0 + 0.25 * (n - 1.0) * (a + std::hypot(a, b) * std::cos(2.0 * delta)));
}

double visibility(int n_particles, double twist) {
  check_n(n_particles);
  return std::pow(std::cos(twist), n_particles - 1);
}

}  // namespace difint::spin
