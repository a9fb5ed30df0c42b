#include "difint/spin_model.hpp"

#include <cmath>
#include <complex>

#include <doctest.h>

#include "difint/errors.hpp"
#include "oracle_dense.hpp"
#include "test_util.hpp"

using namespace difint;

TEST_SUITE_BEGIN("spin_model");

TEST_CASE("bs_state: single particle is the balanced superposition") {
  const auto state = spin::bs_state(1);
  REQUIRE(state.amplitudes.size() == 2);
  CHECK(state.amplitudes[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(state.amplitudes[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(state.norm_sq() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bs_state: normalized for a range of N") {
  for (int n : {1, 2, 3, 7, 50, 51, 137, 1000}) {
    const auto state = spin::bs_state(n);
    CHECK(static_cast<int>(state.amplitudes.size()) == n + 1);
    CHECK(std::abs(state.norm_sq() - 1.0) < 1e-12);
  }
}

TEST_CASE("bs_state: N=1000 peak matches the normalized wide-N profile") {
  const int n = 1000;
  const auto state = spin::bs_state(n);
  // Reference: the e^{-mu^2/N} amplitude profile, normalized numerically.
  double z = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double mu = i - 0.5 * n;
    z += std::exp(-2.0 * mu * mu / n);
  }
  const double peak_ref = 1.0 / z;  // |c_0|^2 of the profile
  CHECK(peak_ref == doctest::Approx(std::sqrt(2.0 / (M_PI * n))).epsilon(1e-3));

  int argmax = 0;
  for (int i = 0; i <= n; ++i)
    if (std::norm(state.amplitudes[i]) > std::norm(state.amplitudes[argmax])) argmax = i;
  CHECK(argmax == n / 2);  // mu = 0
  CHECK(std::norm(state.amplitudes[n / 2]) == doctest::Approx(peak_ref).epsilon(1e-3));
}

TEST_CASE("bs_state: rejects N = 0") {
  CHECK_THROWS_AS(spin::bs_state(0), validation_error);
}

TEST_CASE("apply_phase_twist: identity at zero angles") {
  const auto state = spin::bs_state(5);
  const auto mapped = spin::apply_phase_twist(state, 0.0, 0.0);
  for (std::size_t i = 0; i < state.amplitudes.size(); ++i)
    CHECK(std::abs(mapped.amplitudes[i] - state.amplitudes[i]) < 1e-15);
}

TEST_CASE("apply_phase_twist: N=2 phase pi pattern and norm preservation") {
  const auto state = spin::bs_state(2);
  const auto mapped = spin::apply_phase_twist(state, M_PI, 0.0);
  // c_mu picks up e^{-i pi mu} = (-1)^mu on the integer lattice mu = (-1, 0, 1).
  const std::complex<double> expected[3] = {{-1.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}};
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(mapped.amplitudes[i] - expected[i] * state.amplitudes[i]) < 1e-14);
  CHECK(mapped.norm_sq() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("apply_phase_twist: random angles preserve the norm") {
  auto state = spin::bs_state(40);
  state = spin::apply_phase_twist(std::move(state), 1.234, 0.077);
  CHECK(std::abs(state.norm_sq() - 1.0) < 1e-12);
}

TEST_CASE("rotation_half_pi: N=1 equals the spin-1/2 x rotation") {
  const auto rot = spin::rotation_half_pi(1);
  const double c = std::cos(M_PI / 4.0);
  const double s = std::sin(M_PI / 4.0);
  CHECK(std::abs(rot->element(0, 0) - std::complex<double>(c, 0.0)) < 1e-14);
  CHECK(std::abs(rot->element(0, 1) - std::complex<double>(0.0, -s)) < 1e-14);
  CHECK(std::abs(rot->element(1, 0) - std::complex<double>(0.0, -s)) < 1e-14);
  CHECK(std::abs(rot->element(1, 1) - std::complex<double>(c, 0.0)) < 1e-14);
}

TEST_CASE("rotation_half_pi: matches the dense exponential at N=4") {
  const auto rot = spin::rotation_half_pi(4);
  const auto dense = oracle::rotation(oracle::jx(4), M_PI / 2.0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c)
      CHECK(std::abs(rot->element(r, c) - dense.at(r, c)) < 1e-10);
}

TEST_CASE("rotation_half_pi: unitarity defect below 1e-10 up to N=64") {
  for (int n : {1, 2, 3, 8, 17, 33, 64}) {
    const auto rot = spin::rotation_half_pi(n);
    const int dim = n + 1;
    // Rows of the real factor are orthonormal iff the rotation is unitary.
    double defect = 0.0;
    for (int r1 = 0; r1 < dim; ++r1) {
      const auto row1 = rot->d_row(r1);
      for (int r2 = r1; r2 < dim; ++r2) {
        const auto row2 = rot->d_row(r2);
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += row1[c] * row2[c];
        defect = std::max(defect, std::abs(dot - (r1 == r2 ? 1.0 : 0.0)));
      }
    }
    CHECK(defect < 1e-10);
  }
}

TEST_CASE("rotation_half_pi: spot-checked unitarity at N=1000") {
  const auto rot = spin::rotation_half_pi(1000);
  const int dim = 1001;
  for (int r1 : {0, 13, 250, 500, 999}) {
    const auto row1 = rot->d_row(r1);
    for (int r2 : {0, 13, 250, 500, 999, 1000}) {
      const auto row2 = rot->d_row(r2);
      double dot = 0.0;
      for (int c = 0; c < dim; ++c) dot += row1[c] * row2[c];
      CHECK(std::abs(dot - (r1 == r2 ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("rotation_half_pi: capacity error above n_max") {
  CHECK_THROWS_AS(spin::rotation_half_pi(11, 10), capacity_error);
}

TEST_CASE("output_distribution: balanced single particle at zero phase") {
  const auto p = spin::output_distribution(1, 0.0, 0.0);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("output_distribution: mean signal at N=10, phi=0.3") {
  const auto p = spin::output_distribution(10, 0.3, 0.0);
  double mean_z = 0.0;
  for (int i = 0; i <= 10; ++i) mean_z += (2.0 * (i - 5.0) / 10.0) * p[i];
  CHECK(mean_z == doctest::Approx(std::sin(0.3)).epsilon(1e-6));
}

TEST_CASE("output_distribution: dense-operator oracle at N=8 with twist") {
  const auto p = spin::output_distribution(8, 0.7, 0.05);
  const auto q = oracle::output_distribution(8, 0.7, 0.05);
  CHECK(test_util::total_variation(p, q) < 1e-9);
}

TEST_CASE("output_distribution: oracle grid N<=12, tv < 1e-9") {
  for (int n = 1; n <= 12; ++n)
    for (double phi : {0.0, 0.3, 1.1, 2.9})
      for (double tau : {0.0, 0.02, 0.1}) {
        const auto p = spin::output_distribution(n, phi, tau);
        const auto q = oracle::output_distribution(n, phi, tau);
        CHECK(test_util::total_variation(p, q) < 1e-9);
      }
}

TEST_CASE("output_distribution: mean-signal law for tau = 0 up to N = 200") {
  for (int n : {2, 5, 17, 64, 128, 200}) {
    for (double phi : {0.0, 0.4, 1.2, 2.0}) {
      const auto p = spin::output_distribution(n, phi, 0.0);
      double mean_z = 0.0;
      for (int i = 0; i <= n; ++i) mean_z += (2.0 * i / n - 1.0) * p[i];
      CHECK(std::abs(mean_z - std::sin(phi)) < 1e-8);
    }
  }
}

TEST_CASE("output_distribution: parity P(mu|phi) = P(-mu|-phi)") {
  for (int n : {3, 6, 11}) {
    for (double tau : {0.0, 0.05}) {
      const auto p = spin::output_distribution(n, 0.8, tau);
      const auto q = spin::output_distribution(n, -0.8, tau);
      for (int i = 0; i <= n; ++i) CHECK(p[i] == doctest::Approx(q[n - i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("output_distribution: normalization and nonnegativity at N=1000") {
  const auto p = spin::output_distribution(1000, 1.0, 0.005);
  double sum = 0.0;
  for (double v : p) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) < 1e-10);
}

TEST_CASE("dephasing_width: values and validity flag") {
  const auto w100 = spin::dephasing_width(100, 0.0);
  CHECK(w100.value == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(w100.valid);

  const auto w1000 = spin::dephasing_width(1000, 0.005);
  CHECK(w1000.value == doctest::Approx(0.026).epsilon(1e-12));
  CHECK(w1000.valid);

  const auto w1 = spin::dephasing_width(1, 0.0);
  CHECK(w1.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(w1.valid);
}

TEST_CASE("jy_variance: coherent value at tau = 0") {
  CHECK(spin::jy_variance(100, 0.0) == doctest::Approx(25.0).epsilon(1e-14));
}

TEST_CASE("jy_variance: dense oracle at N=4, tau=0.1") {
  CHECK(spin::jy_variance(4, 0.1) == doctest::Approx(oracle::jy_variance(4, 0.1)).epsilon(1e-9));
}

TEST_CASE("jy_variance: dense oracle across small N and tau") {
  for (int n : {2, 3, 5, 9})
    for (double tau : {0.01, 0.1, 0.4})
      CHECK(spin::jy_variance(n, tau) ==
            doctest::Approx(oracle::jy_variance(n, tau)).epsilon(1e-9));
}

TEST_CASE("jy_variance: reproduces the small-noise width at large N") {
  const int n = 1000;
  const double tau = 0.004;
  const double scaled = 4.0 * spin::jy_variance(n, tau) / (static_cast<double>(n) * n);
  const double expected = 1.0 / n + (n - 1.0) * (n - 1.0) / n * tau * tau;
  CHECK(scaled == doctest::Approx(expected).epsilon(5e-3));
  // and the two-term width formula within 10 percent
  CHECK(scaled == doctest::Approx(spin::dephasing_width(n, tau).value).epsilon(0.1));
}

TEST_CASE("visibility: limits and values") {
  CHECK(spin::visibility(57, 0.0) == 1.0);
  CHECK(spin::visibility(2, M_PI / 2.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(spin::visibility(1000, 0.005) == doctest::Approx(0.98758).epsilon(1e-4));
  // quadratic approximation cross-check
  CHECK(spin::visibility(1000, 0.005) ==
        doctest::Approx(1.0 - 999.0 / 2.0 * 0.005 * 0.005).epsilon(1e-4));
}

TEST_SUITE_END();
