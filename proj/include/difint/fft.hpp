#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace difint {

// Iterative radix-2 FFT (decimation in time), forward sign convention
// X_k = sum_i x_i exp(-2*pi*i*k*n/N). Table grids are powers of two by
// construction, so no general-length machinery is needed.
class Radix2Fft {
 public:
  explicit Radix2Fft(std::size_t n);

  std::size_t size() const { return n_; }

  // In-place transform of n() complex values.
  void forward(std::complex<double>* data) const;
  void forward(std::vector<std::complex<double>>& data) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // exp(-2 pi i k / n), k < n/2
};

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

}  // namespace difint
