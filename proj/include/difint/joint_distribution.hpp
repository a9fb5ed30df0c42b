#pragma once

// Exact two-interferometer joint measurement distribution under uniform
// common-mode phase noise, tabulated on a power-of-two phase grid, plus the
// reproducible shot sampler. The common phase integral becomes a K-point
// rectangle sum, which is exact here because the integrand is a trigonometric
// polynomial of degree at most N1+N2 < K.

#include <cstdint>
#include <memory>
#include <vector>

#include "difint/spin_model.hpp"

namespace difint {

struct InterferometerConfig {
  int n1 = 1;
  int n2 = 1;
  double tau = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  int n_max = spin::kDefaultNMax;

  // Differential phase reduced to [0, pi]; the joint distribution cannot
  // identify its sign.
  double theta() const;
  // Uncorrelated-noise variance 1/N1 + 1/N2 + (N1+N2) tau^2.
  double sigma_true_sq() const;

  void validate() const;  // throws validation_error naming the offending field
};

struct ShotData {
  int n1 = 0;
  int n2 = 0;
  std::uint64_t seed = 0;
  std::vector<double> z1, z2;  // normalized population differences in [-1, 1]
  std::vector<double> s1, s2;  // arcsin transforms

  std::size_t size() const { return z1.size(); }
};

// Per-interferometer outcome distributions P_j(mu | grid phase). Columns of
// interferometer 1 sit on phi_k = -pi + k*step; columns of interferometer 2
// on phi_k - theta, so a common index k realizes the differential phase
// exactly. Stored as cumulative sums, column-major, for O(log N) sampling.
class ConditionalTable {
 public:
  ConditionalTable(const InterferometerConfig& config, std::size_t k_phi);

  std::size_t k_phi() const { return k_phi_; }
  int n(int which) const { return which == 0 ? n1_ : n2_; }
  double tau() const { return tau_; }
  double theta() const { return theta_; }

  // P_j(outcome index i | grid column k), reconstructed from the cumksums.
  double mass(int which, int i, std::size_t k) const;
  // Inverse-CDF draw from column k; u in [0, 1).
  int sample_outcome(int which, std::size_t k, double u) const;
  // Mean of z = 2 mu / N over column k.
  double column_mean_z(int which, std::size_t k) const;

 private:
  friend std::vector<std::vector<double>> joint_pmf(const ConditionalTable&);
  const std::vector<double>& cum(int which) const { return which == 0 ? cum1_ : cum2_; }

  int n1_, n2_;
  double tau_, theta_;
  std::size_t k_phi_;
  std::vector<double> cum1_, cum2_;  // cum[k * (N+1) + i]
};

// Builds the table; k_phi = 0 selects the smallest valid power of two,
// at least 4*(max(N1,N2)+1) and at least 256.
std::shared_ptr<const ConditionalTable> build_table(const InterferometerConfig& config,
                                                    std::size_t k_phi = 0);

// Probability mass of the lattice outcome pair (z1, z2).
double joint_density(double z1, double z2, const InterferometerConfig& config,
                     const ConditionalTable& table);

// Full outcome matrix P[i1][i2]; sums to 1.
std::vector<std::vector<double>> joint_pmf(const ConditionalTable& table);

// m paired shots: common phase drawn uniformly on the table grid, outcomes
// drawn per interferometer from the matching columns. Deterministic in seed.
ShotData sample_shots(const InterferometerConfig& config, const ConditionalTable& table,
                      std::size_t m, std::uint64_t seed);

}  // namespace difint
