#include "difint/joint_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "difint/errors.hpp"
#include "difint/fft.hpp"
#include "difint/rng.hpp"

namespace difint {

namespace {

constexpr std::size_t kMinGrid = 256;

// Smallest admissible power-of-two grid for the larger interferometer.
std::size_t auto_grid(int n1, int n2) {
  const std::size_t needed = 4 * (static_cast<std::size_t>(std::max(n1, n2)) + 1);
  return next_power_of_two(std::max(needed, kMinGrid));
}

// Outcome index of a z value on the lattice z = 2i/N - 1, or -1 if z is not
// a lattice point (tolerance 1e-6 lattice units).
int lattice_index(double z, int n) {
  const double x = 0.5 * (z + 1.0) * n;
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-6 || r < 0 || r > n) return -1;
  return static_cast<int>(r);
}

// Tabulates P(mu | phi) for one interferometer on the K phases
// phi_k = offset + 2*pi*k/K, k = 0..K-1, by one FFT per outcome row:
// the amplitude <mu_r| R_x phase(phi) twist |bs> is a Fourier series in phi
// with N+1 terms. Writes cumulative sums column-major into cum.
void tabulate(int n, double tau, double offset, std::size_t k, std::vector<double>& cum) {
  const int dim = n + 1;
  const auto rot = spin::rotation_half_pi(n);
  const spin::SpinState base = spin::apply_phase_twist(spin::bs_state(n), 0.0, tau);

  // Per-column (input index c) factor: i^{-c} (from the x-rotation phases),
  // (-1)^c (grid start at -pi), exp(-i*offset*mu_c) and the twisted state.
  std::vector<std::complex<double>> col_factor(dim);
  for (int c = 0; c < dim; ++c) {
    const double mu = base.mu(c);
    const double ang = -offset * mu;
    std::complex<double> f = std::complex<double>(std::cos(ang), std::sin(ang)) * base.amplitudes[c];
    switch (c & 3) {  // (-i)^c * (-1)^c = i^c
      case 1: f *= std::complex<double>(0.0, 1.0); break;
      case 2: f *= -1.0; break;
      case 3: f *= std::complex<double>(0.0, -1.0); break;
      default: break;
    }
    col_factor[c] = f;
  }

  cum.assign(k * static_cast<std::size_t>(dim), 0.0);
  Radix2Fft fft(k);
  std::vector<std::complex<double>> work(k);
  for (int r = 0; r < dim; ++r) {
    const auto d_row = rot->d_row(r);
    std::fill(work.begin(), work.end(), std::complex<double>(0.0, 0.0));
    for (int c = 0; c < dim; ++c) work[c] = d_row[c] * col_factor[c];
    fft.forward(work);
    for (std::size_t kk = 0; kk < k; ++kk)
      cum[kk * static_cast<std::size_t>(dim) + r] = std::norm(work[kk]);
  }

  // Per-column cumulative sum, normalized so the last entry is exactly 1.
  for (std::size_t kk = 0; kk < k; ++kk) {
    double* col = cum.data() + kk * static_cast<std::size_t>(dim);
    double run = 0.0;
    for (int r = 0; r < dim; ++r) {
      run += col[r];
      col[r] = run;
    }
    const double inv = 1.0 / run;
    for (int r = 0; r < dim; ++r) col[r] *= inv;
    col[dim - 1] = 1.0;
  }
}

}  // namespace

double InterferometerConfig::theta() const {
  return std::abs(std::remainder(theta1 - theta2, 2.0 * M_PI));
}

double InterferometerConfig::sigma_true_sq() const {
  return 1.0 / n1 + 1.0 / n2 + (n1 + n2) * tau * tau;
}

void InterferometerConfig::validate() const {
  if (n1 < 1) throw validation_error("n1: must be >= 1");
  if (n2 < 1) throw validation_error("n2: must be >= 1");
  if (n1 > n_max) throw capacity_error("n1: exceeds n_max = " + std::to_string(n_max));
  if (n2 > n_max) throw capacity_error("n2: exceeds n_max = " + std::to_string(n_max));
  if (!(tau >= 0.0)) throw validation_error("tau: must be >= 0");
  if (!std::isfinite(theta1)) throw validation_error("theta1: must be finite");
  if (!std::isfinite(theta2)) throw validation_error("theta2: must be finite");
}

ConditionalTable::ConditionalTable(const InterferometerConfig& config, std::size_t k_phi)
    : n1_(config.n1), n2_(config.n2), tau_(config.tau), theta_(config.theta()), k_phi_(k_phi) {
  config.validate();
  if (!is_power_of_two(k_phi_))
    throw validation_error("k_phi: must be a power of two");
  if (k_phi_ < 4 * (static_cast<std::size_t>(std::max(n1_, n2_)) + 1))
    throw validation_error("k_phi: grid too coarse, need at least 4*(max(N1,N2)+1)");
  // Work in the frame of interferometer 1: its columns at the bare grid, the
  // second interferometer offset by -theta. The joint law then depends on the
  // constant phases only through theta, exactly.
  tabulate(n1_, tau_, 0.0, k_phi_, cum1_);
  tabulate(n2_, tau_, -theta_, k_phi_, cum2_);
}

double ConditionalTable::mass(int which, int i, std::size_t k) const {
  const int dim = n(which) + 1;
  const double* col = cum(which).data() + k * static_cast<std::size_t>(dim);
  const double m = i == 0 ? col[0] : col[i] - col[i - 1];
  return m > 0.0 ? m : 0.0;
}

int ConditionalTable::sample_outcome(int which, std::size_t k, double u) const {
  const int dim = n(which) + 1;
  const double* col = cum(which).data() + k * static_cast<std::size_t>(dim);
  const double* it = std::upper_bound(col, col + dim, u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - col, dim - 1));
}

double ConditionalTable::column_mean_z(int which, std::size_t k) const {
  const int nn = n(which);
  double mean = 0.0;
  for (int i = 0; i <= nn; ++i) mean += (2.0 * i / nn - 1.0) * mass(which, i, k);
  return mean;
}

std::shared_ptr<const ConditionalTable> build_table(const InterferometerConfig& config,
                                                    std::size_t k_phi) {
  config.validate();
  if (k_phi == 0) k_phi = auto_grid(config.n1, config.n2);
  return std::make_shared<const ConditionalTable>(config, k_phi);
}

double joint_density(double z1, double z2, const InterferometerConfig& config,
                     const ConditionalTable& table) {
  const int i1 = lattice_index(z1, config.n1);
  if (i1 < 0) throw validation_error("z1: not a lattice outcome 2*mu/N1");
  const int i2 = lattice_index(z2, config.n2);
  if (i2 < 0) throw validation_error("z2: not a lattice outcome 2*mu/N2");
  const std::size_t k = table.k_phi();
  double acc = 0.0;
  for (std::size_t kk = 0; kk < k; ++kk)
    acc += table.mass(0, i1, kk) * table.mass(1, i2, kk);
  return acc / static_cast<double>(k);
}

std::vector<std::vector<double>> joint_pmf(const ConditionalTable& table) {
  const int dim1 = table.n(0) + 1;
  const int dim2 = table.n(1) + 1;
  const std::size_t k = table.k_phi();
  std::vector<std::vector<double>> pmf(dim1, std::vector<double>(dim2, 0.0));
  std::vector<double> p1(dim1), p2(dim2);
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double* c1 = table.cum(0).data() + kk * static_cast<std::size_t>(dim1);
    const double* c2 = table.cum(1).data() + kk * static_cast<std::size_t>(dim2);
    p1[0] = c1[0];
    for (int i = 1; i < dim1; ++i) p1[i] = c1[i] - c1[i - 1];
    p2[0] = c2[0];
    for (int i = 1; i < dim2; ++i) p2[i] = c2[i] - c2[i - 1];
    for (int i = 0; i < dim1; ++i) {
      const double w = p1[i];
      if (w == 0.0) continue;
      double* row = pmf[i].data();
      for (int j = 0; j < dim2; ++j) row[j] += w * p2[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(k);
  for (auto& row : pmf)
    for (auto& v : row) v *= inv;
  return pmf;
}

ShotData sample_shots(const InterferometerConfig& config, const ConditionalTable& table,
                      std::size_t m, std::uint64_t seed) {
  if (m < 1) throw validation_error("m: must be >= 1");
  ShotData data;
  data.n1 = config.n1;
  data.n2 = config.n2;
  data.seed = seed;
  data.z1.resize(m);
  data.z2.resize(m);
  data.s1.resize(m);
  data.s2.resize(m);
  SplitMix64 rng(seed);
  const std::size_t k = table.k_phi();
  for (std::size_t j = 0; j < m; ++j) {
    // Draw order per shot: grid phase, outcome 1, outcome 2.
    const std::size_t kk = std::min<std::size_t>(
        static_cast<std::size_t>(rng.next_double() * static_cast<double>(k)), k - 1);
    const int i1 = table.sample_outcome(0, kk, rng.next_double());
    const int i2 = table.sample_outcome(1, kk, rng.next_double());
    data.z1[j] = (2.0 * i1 - config.n1) / config.n1;
    data.z2[j] = (2.0 * i2 - config.n2) / config.n2;
    data.s1[j] = std::asin(data.z1[j]);
    data.s2[j] = std::asin(data.z2[j]);
  }
  return data;
}

}  // namespace difint
