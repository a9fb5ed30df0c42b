#pragma once

// Exact quantum mechanics of a single Mach-Zehnder interferometer on the
// collective spin j = N/2: splitter state, phase + one-axis-twist evolution,
// final pi/2 rotation and the measured population-difference distribution,
// plus the closed-form dephasing/visibility expressions.

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace difint::spin {

inline constexpr int kDefaultNMax = 2000;

// State of N two-mode particles in the Jz eigenbasis. Index i of the
// amplitude vector corresponds to mu = i - N/2, i = 0..N.
struct SpinState {
  int n_particles = 0;
  std::vector<std::complex<double>> amplitudes;

  double mu(int i) const { return static_cast<double>(i) - 0.5 * n_particles; }
  double norm_sq() const;
};

// State after the first balanced splitter acting on the spin-polarized
// input: all-positive sqrt-binomial amplitudes over mu.
SpinState bs_state(int n_particles);

// c_mu -> c_mu * exp(-i*phase*mu) * exp(-i*twist*mu^2). Pure phase map.
SpinState apply_phase_twist(SpinState state, double phase, double twist);

// Matrix of exp(-i*(pi/2)*Jx) for spin j = N/2. Internally holds the real
// rotation matrix d(pi/2) about y; the x-rotation differs from it by the
// diagonal phase conjugation  M[r,c] = i^(r-c) d[r,c].
class RotationHalfPi {
 public:
  explicit RotationHalfPi(int n_particles);

  int n_particles() const { return n_; }
  int dim() const { return n_ + 1; }

  std::complex<double> element(int row, int col) const;

  // out = exp(-i*(pi/2)*Jx) * in ; aliasing not allowed.
  void apply(std::span<const std::complex<double>> in,
             std::span<std::complex<double>> out) const;

  // Row of the real y-rotation matrix d(pi/2), contiguous over columns.
  std::span<const double> d_row(int row) const;

 private:
  int n_;
  std::vector<double> d_;  // (N+1)x(N+1), row-major
};

// Cached per N; safe for concurrent readers after construction.
std::shared_ptr<const RotationHalfPi> rotation_half_pi(int n_particles,
                                                       int n_max = kDefaultNMax);

// P(mu | phase, twist) for the full splitter->phase/twist->splitter->Jz
// sequence. Length N+1, clipped at zero and renormalized.
std::vector<double> output_distribution(int n_particles, double phase, double twist,
                                        int n_max = kDefaultNMax);

struct DephasingWidth {
  double value = 0.0;  // sigma_phi^2 = 1/N + N*tau^2
  bool valid = true;   // false once sigma_phi^2 > 0.5 (small-width expansion)
};
DephasingWidth dephasing_width(int n_particles, double twist);

// Variance of Jy on the twisted splitter state; N/4 at twist = 0.
double jy_variance(int n_particles, double twist);

// Interference-fringe visibility cos^(N-1)(twist).
double visibility(int n_particles, double twist);

}  // namespace difint::spin
