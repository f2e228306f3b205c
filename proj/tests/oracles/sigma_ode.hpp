#pragma once

// Distortion coefficients from their defining boundary problem
//   y'' = -kappa theta^2 y,  y(0) = 0,  y(1) = 1,
// integrated with a fixed-step RK4 shooting method. Independent of the
// closed forms in the library.

#include <cmath>
#include <utility>

namespace oracle {

// Value at t of the solution with y(0) = 0, y'(0) = 1.
inline std::pair<double, double> shoot(double c, double t, int steps = 2000) {
  double y = 0.0, v = 1.0;
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    const double k1y = v, k1v = -c * y;
    const double k2y = v + 0.5 * h * k1v, k2v = -c * (y + 0.5 * h * k1y);
    const double k3y = v + 0.5 * h * k2v, k3v = -c * (y + 0.5 * h * k2y);
    const double k4y = v + h * k3v, k4v = -c * (y + h * k3y);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return {y, v};
}

// sigma_kappa^{(t)}(theta) for kappa theta^2 < pi^2.
inline double sigma_ode(double kappa, double t, double theta) {
  const double c = kappa * theta * theta;
  if (t == 0.0) return 0.0;
  return shoot(c, t).first / shoot(c, 1.0).first;
}

// tau_{K,N}^{(t)}(theta) = t^{1/N} sigma_{K/(N-1)}^{(t)}(theta)^{1 - 1/N}, N > 1.
inline double tau_ode(double K, double N, double t, double theta) {
  return std::pow(t, 1.0 / N) * std::pow(sigma_ode(K / (N - 1.0), t, theta), 1.0 - 1.0 / N);
}

}  // namespace oracle
