#include <cmath>
#include <random>

#include <doctest.h>

#include "lorot/coeffs.hpp"
#include "oracles/sigma_ode.hpp"

using namespace lorot;
using coeffs::CoeffParams;

TEST_CASE("s_kappa branches") {
  CHECK(coeffs::s_kappa(0.0, 2.5) == doctest::Approx(2.5));
  CHECK(coeffs::s_kappa(coeffs::kPiSquared, 0.5) == doctest::Approx(1.0 / coeffs::kPi).epsilon(1e-14));
  CHECK(coeffs::s_kappa(-1.0, 1.0) == doctest::Approx(1.17520119).epsilon(1e-8));
}

TEST_CASE("sigma examples") {
  CHECK(coeffs::sigma({0.0, 3.0, 0.3, 7.0}).value() == doctest::Approx(0.3));
  CHECK(coeffs::sigma({10.0, 1.0, 0.5, 1.0}).is_pos_inf());
  CHECK(coeffs::sigma({-2.0, 2.0, 0.5, 2.0}).value() == doctest::Approx(std::sinh(1.0) / std::sinh(2.0)).epsilon(1e-13));
}

TEST_CASE("tau examples") {
  CHECK(coeffs::tau_coeff({0.0, 4.0, 0.25, 3.0}).value() == doctest::Approx(0.25));
  CHECK(coeffs::tau_coeff({-2.0, 2.0, 0.5, 2.0}).value() ==
        doctest::Approx(std::sqrt(0.5 * std::sinh(std::sqrt(2.0)) / std::sinh(2 * std::sqrt(2.0)))).epsilon(1e-13));
  CHECK(coeffs::tau_coeff({5.0, 1.0, 0.7, 0.1}).value() == doctest::Approx(0.7));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(coeffs::sigma({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(coeffs::sigma({0.0, 2.0, 1.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(coeffs::sigma({0.0, 2.0, 0.5, -1.0}), std::invalid_argument);
}

TEST_CASE("G_t and H_t examples") {
  CHECK(coeffs::g_t(0, 0, 0, 0.5).value() == doctest::Approx(0.0));
  CHECK(coeffs::g_t(std::log(2.0), std::log(2.0), 0, 0.25).value() == doctest::Approx(std::log(2.0)));
  const double s = coeffs::sigma_kappa(1.0, 0.5, 1.0).value();
  CHECK(coeffs::g_t(1, 0, 1, 0.5).value() == doctest::Approx(std::log(s * (std::exp(1.0) + 1.0))));
  CHECK(coeffs::h_t(0, 0, 0.3).value() == doctest::Approx(std::log(0.7)));
  CHECK(coeffs::h_t(2, 0, 0).value() == doctest::Approx(2.0));
  CHECK(coeffs::h_t(0, -4, 0.5).value() == doctest::Approx(std::log(std::sinh(1.0) / std::sinh(2.0))));
  CHECK(coeffs::h_t(1, 0, 1).is_neg_inf());
  CHECK_THROWS_AS(coeffs::g_t(0, 0, coeffs::kPiSquared, 0.5), std::domain_error);
}

TEST_CASE("vol_profile") {
  CHECK(coeffs::vol_profile(0, 2, 3) == doctest::Approx(std::sqrt(4.5)));
  CHECK(coeffs::vol_profile(0, 3.5, 1.7) == doctest::Approx(std::pow(std::pow(1.7, 3.5) / 3.5, 1 / 3.5)));
  // int_0^1 2 sinh(s / sqrt 2)^2 ds = sqrt(2) sinh(sqrt 2) / 2 ... antiderivative: sqrt2/2 sinh(2s/sqrt2) - s.
  const double a = std::sqrt(2.0) / 2.0 * std::sinh(std::sqrt(2.0)) - 1.0;
  CHECK(coeffs::vol_profile(-1, 3, 1) == doctest::Approx(std::cbrt(a)).epsilon(1e-9));
  CHECK_THROWS_AS(coeffs::vol_profile(1, 2, 4.0), std::domain_error);
}

TEST_CASE("sigma and tau agree with the comparison ODE") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> K(-3, 3), N(1.5, 8), t(0, 1), th(0.1, 2);
  for (int k = 0; k < 200; ++k) {
    const CoeffParams p{K(rng), N(rng), t(rng), th(rng)};
    if (p.K * p.theta * p.theta / (p.N - 1.0) >= 0.9 * coeffs::kPiSquared) continue;
    CHECK(coeffs::sigma(p).value() == doctest::Approx(oracle::sigma_ode(p.K / p.N, p.t, p.theta)).epsilon(1e-8));
    CHECK(coeffs::tau_coeff(p).value() == doctest::Approx(oracle::tau_ode(p.K, p.N, p.t, p.theta)).epsilon(1e-8));
  }
}

TEST_CASE("sigma keeps 1e-8 relative accuracy just below the pole") {
  const long double pi = 3.141592653589793238462643383279502884L;
  for (double gap : {1e-6, 1e-4, 1e-2}) {
    for (double theta : {0.3, 1.0, 2.5}) {
      const double kappa = (coeffs::kPiSquared - gap) / (theta * theta);
      for (double t : {0.05, 0.5, 0.95}) {
        // Oracle in extended precision from the exact pole, not from the rounded pi^2.
        const long double root = std::sqrt(pi * pi - static_cast<long double>(gap));
        const long double expect = std::sin(t * root) / std::sin(root);
        const double got = coeffs::sigma_kappa(kappa, t, theta).value();
        CHECK(got == doctest::Approx(static_cast<double>(expect)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("sigma is nondecreasing in kappa and continuous at the flat branch") {
  for (double t : {0.1, 0.5, 0.9}) {
    double prev = 0.0;
    for (double kappa = -5.0; kappa < 9.0; kappa += 0.25) {
      const double v = coeffs::sigma_kappa(kappa, t, 1.0).value();
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
    CHECK(coeffs::sigma_kappa(1e-15, t, 1.0).value() == doctest::Approx(t));
    CHECK(coeffs::sigma_kappa(1e-9, t, 1.0).value() == doctest::Approx(t).epsilon(1e-8));
  }
}
