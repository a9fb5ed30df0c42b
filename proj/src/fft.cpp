#include "difint/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace difint {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Radix2Fft::Radix2Fft(std::size_t n) : n_(n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("fft size must be a power of two");
  bitrev_.resize(n);
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < log2n; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(n / 2);
  const double step = -2.0 * M_PI / static_cast<double>(n);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = step * static_cast<double>(k);
    twiddle_[k] = {std::cos(a), std::sin(a)};
  }
}

void Radix2Fft::forward(std::complex<double>* data) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (j > i) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> w = twiddle_[k * stride];
        const std::complex<double> u = data[start + k];
        const std::complex<double> t = w * data[start + k + half];
        data[start + k] = u + t;
        data[start + k + half] = u - t;
      }
    }
  }
}

void Radix2Fft::forward(std::vector<std::complex<double>>& data) const {
  if (data.size() != n_) throw std::invalid_argument("fft: data size mismatch");
  forward(data.data());
}

}  // namespace difint
