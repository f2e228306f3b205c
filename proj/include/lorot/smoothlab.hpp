#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lorot/check_report.hpp"

// Flat Minkowski background R^{1,n-1} with signature (+, -, ..., -): a vector
// xi is timelike when xi^T eta xi > 0 and future-directed when xi_0 > 0.
namespace lorot::smooth {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// diag(1, -1, ..., -1) of size n.
[[nodiscard]] Mat minkowski_metric(std::size_t n);

/// Lorentzian norm squared xi^T eta xi.
[[nodiscard]] double lorentz_norm2(const Vec& xi);

/// Scalar potential with optional analytic derivatives. Missing derivatives
/// fall back to central differences with step 1e-4 * max(1, |z|).
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  bool constant = false;

  [[nodiscard]] double operator()(const Vec& z) const { return value(z); }
  [[nodiscard]] Vec grad(const Vec& z) const;
  [[nodiscard]] Mat hess(const Vec& z) const;

  [[nodiscard]] static ScalarField constant_field(double c);
  /// V(z) = c + b.z + z^T Q z / 2 with Q symmetric.
  [[nodiscard]] static ScalarField quadratic(double c, const Vec& b, const Mat& Q);
};

struct WeightedFlatModel {
  std::size_t n = 2;
  ScalarField V = ScalarField::constant_field(0.0);
  double N = 2.0;

  /// Throws std::invalid_argument if N < n, or N == n with V not constant.
  void validate() const;
};

/// Ric^{N,V}(xi, xi) = Hess V(xi, xi) - <DV, xi>^2 / (N - n); flat Ric = 0.
[[nodiscard]] double bakry_emery_ricci(const WeightedFlatModel& model, const Vec& x, const Vec& xi);

/// Monge transport T_t(x) = x + t X(x) with differential DX.
struct TransportField {
  std::function<Vec(const Vec&)> X;
  std::function<Mat(const Vec&)> jacobian;
  std::vector<double> t_grid;
};

/// Raised when A_t = I + t DX(x) is singular on the grid.
class CausticError : public std::runtime_error {
 public:
  CausticError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
  [[nodiscard]] double t() const { return t_; }

 private:
  double t_;
};

struct JacobianRecord {
  double t = 0.0;
  Mat A;
  double j = 0.0;    ///< |det A_t| e^{V(T_t x)}
  double phi = 0.0;  ///< log j
};

/// Throws std::invalid_argument when X(x) is not future timelike and
/// CausticError at the first grid time with |det A_t| <= 1e-12.
[[nodiscard]] std::vector<JacobianRecord> jacobian_along_transport(const WeightedFlatModel& model,
                                                                   const TransportField& field, const Vec& x);

struct RiccatiResult {
  std::vector<double> t_grid;
  std::vector<Mat> closed_form;  ///< B0 (I + t B0)^{-1}
  std::vector<Mat> integrated;   ///< RK4 solution of dB/dt = -B^2
  double max_discrepancy = 0.0;
};

/// Flat Riccati flow on the grid. Throws std::domain_error when I + t B0
/// is singular for some t in [0, max grid time].
[[nodiscard]] RiccatiResult riccati_flat(const Mat& B0, const std::vector<double>& t_grid,
                                         unsigned steps_per_unit = 4096);

struct JSample {
  double t = 0.0;
  double j = 0.0;
};

enum class Coefficient { sigma, tau };

/// Checks (a) phi'' + phi'^2 / N' <= -K theta^2 by finite differences on a
/// uniform grid and (b) j_t^{1/N'} >= c^{(1-t)} j_0^{1/N'} + c^{(t)} j_1^{1/N'}
/// at each interior node. The report passes iff (b) holds or (a) fails
/// somewhere; entries labelled "hypothesis" do not enter the verdict.
[[nodiscard]] CheckReport verify_distortion_concavity(const std::vector<JSample>& samples, double theta, double K,
                                                      double nprime, Coefficient coefficient = Coefficient::tau);

/// RK4 solution of y'' = -c y with y(0) = y0, y(1) = y1 (shooting by
/// superposition). Throws std::domain_error when c >= pi^2.
[[nodiscard]] std::vector<double> comparison_ode(double c, double y0, double y1, const std::vector<double>& t_grid,
                                                 unsigned steps = 4096);

/// Jacobian whose N'-th root solves the sigma_{K,N'} equality ODE.
[[nodiscard]] std::vector<JSample> sigma_equality_jacobian(double K, double nprime, double theta, double j0,
                                                           double j1, const std::vector<double>& t_grid);

/// Equality case of the tau_{K,N'} inequality: the N'-th roots of two cone
/// Jacobians j = a d (a linear, d^{1/(N'-1)} solving the sigma_{K,N'-1}
/// ODE, vanishing at the far end) are added. Each cone is integrated
/// numerically. Returns j_t^{1/N'} on the grid.
[[nodiscard]] std::vector<double> tau_equality_root(double K, double nprime, double theta, double j0, double j1,
                                                    const std::vector<double>& t_grid);

/// `line,t,j,phi` rows.
[[nodiscard]] std::string jacobian_to_csv(const std::vector<std::vector<JacobianRecord>>& lines);

}  // namespace lorot::smooth
