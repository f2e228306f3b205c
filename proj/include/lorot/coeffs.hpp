#pragma once

#include "lorot/ext_real.hpp"

namespace lorot::coeffs {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPiSquared = kPi * kPi;

/// |kappa * theta^2| below this switches to the flat branch.
inline constexpr double kFlatThreshold = 1e-14;

/// Parameters of the (K, N) distortion coefficients.
struct CoeffParams {
  double K = 0.0;      ///< curvature lower bound
  double N = 1.0;      ///< dimension parameter, N >= 1
  double t = 0.0;      ///< interpolation time in [0, 1]
  double theta = 0.0;  ///< time separation, >= 0

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Generalized sine: sin(sqrt(k) th)/sqrt(k), th, or sinh(sqrt(-k) th)/sqrt(-k).
[[nodiscard]] double s_kappa(double kappa, double theta);

/// sigma_kappa^{(t)}(theta); +inf iff kappa theta^2 >= pi^2.
[[nodiscard]] ExtReal sigma_kappa(double kappa, double t, double theta);

/// sigma_{K,N}^{(t)}(theta) = sigma_{K/N}^{(t)}(theta).
[[nodiscard]] ExtReal sigma(const CoeffParams& params);

/// tau_{K,N}^{(t)}(theta) = t^{1/N} sigma_{K,N-1}^{(t)}(theta)^{1-1/N}.
///
/// For N == 1 the exponent 1 - 1/N vanishes and sigma_{K,0} is undefined;
/// the coefficient is taken to be t in that case.
[[nodiscard]] ExtReal tau_coeff(const CoeffParams& params);

/// G_t(x, y, kappa) = log[sigma_kappa^{(1-t)}(1) e^x + sigma_kappa^{(t)}(1) e^y].
/// Throws std::domain_error for kappa >= pi^2.
[[nodiscard]] ExtReal g_t(double x, double y, double kappa, double t);

/// H_t(x, kappa) = log sigma_kappa^{(1-t)}(1) + x; equals -inf at t = 1.
/// Throws std::domain_error for kappa >= pi^2.
[[nodiscard]] ExtReal h_t(double x, double kappa, double t);

/// Model volume profile [int_0^r s_{K/(N-1)}(s)^{N-1} ds]^{1/N}, N > 1.
///
/// Adaptive Gauss-Kronrod quadrature to 1e-10 relative error. Throws
/// std::domain_error when K > 0 and r exceeds pi sqrt((N-1)/K).
[[nodiscard]] double vol_profile(double K, double N, double r);

}  // namespace lorot::coeffs
