#pragma once

// Brute-force reference pipeline for small particle numbers: dense collective
// spin operators and a scaling-and-squaring matrix exponential. Test-only and
// kept independent of the library's rotation construction.

#include <complex>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

struct DenseMatrix {
  int dim = 0;
  std::vector<Complex> a;  // row-major

  Complex& at(int r, int c) { return a[static_cast<std::size_t>(r) * dim + c]; }
  const Complex& at(int r, int c) const { return a[static_cast<std::size_t>(r) * dim + c]; }
};

DenseMatrix identity(int dim);
DenseMatrix matmul(const DenseMatrix& x, const DenseMatrix& y);
std::vector<Complex> matvec(const DenseMatrix& x, const std::vector<Complex>& v);

// exp(M) by scaling and squaring with a Taylor series.
DenseMatrix expm(const DenseMatrix& m);

// Collective spin operators for N particles (j = N/2) in the Jz eigenbasis,
// index i <-> mu = i - N/2 ascending.
DenseMatrix jx(int n_particles);
DenseMatrix jy(int n_particles);
DenseMatrix jz(int n_particles);

// exp(-i * angle * J) for the given operator.
DenseMatrix rotation(const DenseMatrix& generator, double angle);

// Full splitter -> phase/twist -> splitter chain applied to |mu = +N/2>,
// returning the output probabilities over mu.
std::vector<double> output_distribution(int n_particles, double phase, double twist);

// Variance of Jy on exp(-i*twist*Jz^2) exp(-i*(pi/2)*Jy) |mu = +N/2>.
double jy_variance(int n_particles, double twist);

// State after the first splitter and phase/twist stage (dense route).
std::vector<Complex> twisted_state(int n_particles, double phase, double twist);

// Joint outcome distribution by brute-force integration of the common phase
// over an n_eps-point grid, using the dense-operator single-interferometer
// chain (rotations precomputed once).
std::vector<std::vector<double>> joint_fine_grid(int n1, int n2, double tau, double theta1,
                                                 double theta2, std::size_t n_eps);

}  // namespace oracle
