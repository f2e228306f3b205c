#include "lorot/coeffs.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lorot::coeffs {

void CoeffParams::validate() const {
  if (!std::isfinite(K)) throw std::invalid_argument("CoeffParams: K must be finite");
  if (!(N >= 1.0) || !std::isfinite(N)) throw std::invalid_argument("CoeffParams: N must be >= 1");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("CoeffParams: t must lie in [0,1]");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw std::invalid_argument("CoeffParams: theta must be >= 0");
}

double s_kappa(double kappa, double theta) {
  if (kappa > 0.0) {
    const double root = std::sqrt(kappa);
    return std::sin(root * theta) / root;
  }
  if (kappa < 0.0) {
    const double root = std::sqrt(-kappa);
    return std::sinh(root * theta) / root;
  }
  return theta;
}

ExtReal sigma_kappa(double kappa, double t, double theta) {
  const double k_theta2 = kappa * theta * theta;
  if (k_theta2 >= kPiSquared) return ExtReal::pos_infinity();
  if (std::abs(k_theta2) < kFlatThreshold) return t;
  if (t == 0.0) return 0.0;
  if (t == 1.0) return 1.0;
  return s_kappa(kappa, t * theta) / s_kappa(kappa, theta);
}

ExtReal sigma(const CoeffParams& params) {
  params.validate();
  return sigma_kappa(params.K / params.N, params.t, params.theta);
}

ExtReal tau_coeff(const CoeffParams& params) {
  params.validate();
  if (params.N == 1.0) return params.t;
  const ExtReal base = sigma_kappa(params.K / (params.N - 1.0), params.t, params.theta);
  if (!base.is_finite()) return base;
  const double inv_n = 1.0 / params.N;
  return std::pow(params.t, inv_n) * std::pow(base.value(), 1.0 - inv_n);
}

namespace {

void require_below_pole(double kappa, const char* who) {
  if (!(kappa < kPiSquared)) {
    throw std::domain_error(std::string(who) + ": kappa must be < pi^2");
  }
}

}  // namespace

ExtReal g_t(double x, double y, double kappa, double t) {
  require_below_pole(kappa, "g_t");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("g_t: t must lie in [0,1]");
  const double a = sigma_kappa(kappa, 1.0 - t, 1.0).value();
  const double b = sigma_kappa(kappa, t, 1.0).value();
  // log-sum-exp with nonnegative weights; at least one weight is positive.
  const double la = a > 0.0 ? std::log(a) + x : -std::numeric_limits<double>::infinity();
  const double lb = b > 0.0 ? std::log(b) + y : -std::numeric_limits<double>::infinity();
  const double hi = std::max(la, lb);
  const double lo = std::min(la, lb);
  if (std::isinf(lo)) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

ExtReal h_t(double x, double kappa, double t) {
  require_below_pole(kappa, "h_t");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("h_t: t must lie in [0,1]");
  const double a = sigma_kappa(kappa, 1.0 - t, 1.0).value();
  if (a == 0.0) return ExtReal::neg_infinity();
  return std::log(a) + x;
}

double vol_profile(double K, double N, double r) {
  if (!(N > 1.0)) throw std::invalid_argument("vol_profile: N must be > 1");
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("vol_profile: r must be >= 0");
  const double kappa = K / (N - 1.0);
  if (kappa > 0.0 && kappa * r * r > kPiSquared * (1.0 + 1e-12)) {
    throw std::domain_error("vol_profile: r beyond pi sqrt((N-1)/K)");
  }
  if (r == 0.0) return 0.0;
  const double exponent = N - 1.0;
  auto integrand = [kappa, exponent](double s) {
    const double base = s_kappa(kappa, s);
    return base > 0.0 ? std::pow(base, exponent) : 0.0;
  };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double integral = Quadrature::integrate(integrand, 0.0, r, 30, 1e-13);
  return std::pow(integral, 1.0 / N);
}

}  // namespace lorot::coeffs
