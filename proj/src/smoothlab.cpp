#include "lorot/smoothlab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lorot/coeffs.hpp"

namespace lorot::smooth {

namespace {

double fd_step(const Vec& z) { return 1e-4 * std::max(1.0, z.lpNorm<Eigen::Infinity>()); }

void require_grid(const std::vector<double>& t_grid, const char* who) {
  if (t_grid.empty()) throw std::invalid_argument(std::string(who) + ": empty time grid");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] >= 0.0)) throw std::invalid_argument(std::string(who) + ": times must be >= 0");
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) {
      throw std::invalid_argument(std::string(who) + ": times must be strictly increasing");
    }
  }
}

}  // namespace

Mat minkowski_metric(std::size_t n) {
  if (n < 1) throw std::invalid_argument("minkowski_metric: n must be >= 1");
  Mat eta = -Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  eta(0, 0) = 1.0;
  return eta;
}

double lorentz_norm2(const Vec& xi) { return xi(0) * xi(0) - xi.tail(xi.size() - 1).squaredNorm(); }

Vec ScalarField::grad(const Vec& z) const {
  if (gradient) return gradient(z);
  if (constant) return Vec::Zero(z.size());
  const double h = fd_step(z);
  Vec g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    Vec a = z, b = z;
    a(i) += h;
    b(i) -= h;
    g(i) = (value(a) - value(b)) / (2.0 * h);
  }
  return g;
}

Mat ScalarField::hess(const Vec& z) const {
  if (hessian) return hessian(z);
  const auto n = z.size();
  if (constant) return Mat::Zero(n, n);
  const double h = fd_step(z);
  Mat H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i; k < n; ++k) {
      Vec pp = z, pm = z, mp = z, mm = z;
      pp(i) += h; pp(k) += h;
      pm(i) += h; pm(k) -= h;
      mp(i) -= h; mp(k) += h;
      mm(i) -= h; mm(k) -= h;
      H(i, k) = H(k, i) = (value(pp) - value(pm) - value(mp) + value(mm)) / (4.0 * h * h);
    }
  }
  return H;
}

ScalarField ScalarField::constant_field(double c) {
  ScalarField f;
  f.value = [c](const Vec&) { return c; };
  f.gradient = [](const Vec& z) -> Vec { return Vec::Zero(z.size()); };
  f.hessian = [](const Vec& z) -> Mat { return Mat::Zero(z.size(), z.size()); };
  f.constant = true;
  return f;
}

ScalarField ScalarField::quadratic(double c, const Vec& b, const Mat& Q) {
  if (Q.rows() != Q.cols() || Q.rows() != b.size()) throw std::invalid_argument("quadratic: shape mismatch");
  if (!Q.isApprox(Q.transpose(), 1e-12)) throw std::invalid_argument("quadratic: Q must be symmetric");
  ScalarField f;
  f.value = [c, b, Q](const Vec& z) { return c + b.dot(z) + 0.5 * z.dot(Q * z); };
  f.gradient = [b, Q](const Vec& z) -> Vec { return b + Q * z; };
  f.hessian = [Q](const Vec&) -> Mat { return Q; };
  f.constant = b.isZero(0.0) && Q.isZero(0.0);
  return f;
}

void WeightedFlatModel::validate() const {
  if (n < 1) throw std::invalid_argument("WeightedFlatModel: n must be >= 1");
  if (!V.value) throw std::invalid_argument("WeightedFlatModel: V has no value evaluator");
  if (!(N >= static_cast<double>(n))) throw std::invalid_argument("WeightedFlatModel: N must be >= n");
  if (N == static_cast<double>(n) && !V.constant) {
    throw std::invalid_argument("WeightedFlatModel: V must be constant when N == n");
  }
}

double bakry_emery_ricci(const WeightedFlatModel& model, const Vec& x, const Vec& xi) {
  model.validate();
  const auto n = static_cast<Eigen::Index>(model.n);
  if (x.size() != n || xi.size() != n) throw std::invalid_argument("bakry_emery_ricci: dimension mismatch");
  if (!(lorentz_norm2(xi) > 0.0)) throw std::invalid_argument("bakry_emery_ricci: xi must be timelike");
  if (model.N == static_cast<double>(model.n)) return 0.0;
  const double dv = model.V.grad(x).dot(xi);
  return xi.dot(model.V.hess(x) * xi) - dv * dv / (model.N - static_cast<double>(model.n));
}

std::vector<JacobianRecord> jacobian_along_transport(const WeightedFlatModel& model, const TransportField& field,
                                                     const Vec& x) {
  model.validate();
  if (!field.X || !field.jacobian) throw std::invalid_argument("jacobian_along_transport: incomplete field");
  require_grid(field.t_grid, "jacobian_along_transport");
  const auto n = static_cast<Eigen::Index>(model.n);
  if (x.size() != n) throw std::invalid_argument("jacobian_along_transport: dimension mismatch");
  const Vec X = field.X(x);
  if (X.size() != n || !(X(0) > 0.0) || !(lorentz_norm2(X) > 0.0)) {
    throw std::invalid_argument("jacobian_along_transport: X(x) must be future timelike");
  }
  const Mat DX = field.jacobian(x);
  if (DX.rows() != n || DX.cols() != n) throw std::invalid_argument("jacobian_along_transport: DX shape");

  std::vector<JacobianRecord> out;
  out.reserve(field.t_grid.size());
  for (double t : field.t_grid) {
    JacobianRecord r;
    r.t = t;
    r.A = Mat::Identity(n, n) + t * DX;
    const double det = r.A.determinant();
    if (std::abs(det) <= 1e-12) {
      std::ostringstream msg;
      msg << "jacobian_along_transport: caustic, A_t singular at t = " << t;
      throw CausticError(msg.str(), t);
    }
    const double v = model.V(x + t * X);
    r.phi = std::log(std::abs(det)) + v;
    r.j = std::exp(r.phi);
    out.push_back(std::move(r));
  }
  return out;
}

RiccatiResult riccati_flat(const Mat& B0, const std::vector<double>& t_grid, unsigned steps_per_unit) {
  if (B0.rows() != B0.cols()) throw std::invalid_argument("riccati_flat: B0 must be square");
  require_grid(t_grid, "riccati_flat");
  if (steps_per_unit == 0) throw std::invalid_argument("riccati_flat: steps_per_unit must be > 0");
  const auto n = B0.rows();
  const Mat I = Mat::Identity(n, n);

  // I + t B0 is singular iff t = -1/lambda for a real eigenvalue lambda < 0.
  const double t_max = t_grid.back();
  for (const auto& lambda : B0.eigenvalues()) {
    if (std::abs(lambda.imag()) > 1e-12 * std::max(1.0, std::abs(lambda))) continue;
    if (lambda.real() < 0.0 && -1.0 / lambda.real() <= t_max + 1e-12) {
      throw std::domain_error("riccati_flat: I + t B0 is singular at t = " + std::to_string(-1.0 / lambda.real()));
    }
  }

  RiccatiResult res;
  res.t_grid = t_grid;
  const auto rhs = [](const Mat& B) -> Mat { return -B * B; };
  Mat B = B0;
  double now = 0.0;
  for (double t : t_grid) {
    const Mat closed = B0 * (I + t * B0).inverse();
    const double span = t - now;
    if (span > 0.0) {
      const auto steps = static_cast<unsigned>(std::ceil(span * steps_per_unit));
      const double h = span / steps;
      for (unsigned s = 0; s < steps; ++s) {
        const Mat k1 = rhs(B);
        const Mat k2 = rhs(B + 0.5 * h * k1);
        const Mat k3 = rhs(B + 0.5 * h * k2);
        const Mat k4 = rhs(B + h * k3);
        B += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      now = t;
    }
    res.max_discrepancy = std::max(res.max_discrepancy, (closed - B).lpNorm<Eigen::Infinity>());
    res.closed_form.push_back(closed);
    res.integrated.push_back(B);
  }
  return res;
}

std::vector<double> comparison_ode(double c, double y0, double y1, const std::vector<double>& t_grid,
                                   unsigned steps) {
  if (c >= coeffs::kPiSquared) throw std::domain_error("comparison_ode: c must be < pi^2");
  require_grid(t_grid, "comparison_ode");
  if (t_grid.back() > 1.0) throw std::invalid_argument("comparison_ode: times must lie in [0, 1]");
  if (steps == 0) throw std::invalid_argument("comparison_ode: steps must be > 0");

  // u: u(0) = 1, u'(0) = 0; v: v(0) = 0, v'(0) = 1; state (u, u', v, v').
  using State = Eigen::Vector4d;
  const auto f = [c](const State& s) { return State(s(1), -c * s(0), s(3), -c * s(2)); };
  const auto advance = [&](State s, double from, double to) {
    const double span = to - from;
    if (span <= 0.0) return s;
    const auto n = static_cast<unsigned>(std::ceil(span * steps));
    const double h = span / n;
    for (unsigned k = 0; k < n; ++k) {
      const State k1 = f(s);
      const State k2 = f(s + 0.5 * h * k1);
      const State k3 = f(s + 0.5 * h * k2);
      const State k4 = f(s + h * k3);
      s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return s;
  };

  std::vector<State> at;
  at.reserve(t_grid.size());
  State s(1.0, 0.0, 0.0, 1.0);
  double now = 0.0;
  for (double t : t_grid) {
    s = advance(s, now, t);
    now = t;
    at.push_back(s);
  }
  const State end = advance(s, now, 1.0);
  if (!(end(2) > 0.0)) throw std::domain_error("comparison_ode: boundary problem is not solvable");
  const double slope = (y1 - y0 * end(0)) / end(2);

  std::vector<double> out;
  out.reserve(at.size());
  for (const auto& a : at) out.push_back(y0 * a(0) + slope * a(2));
  return out;
}

std::vector<JSample> sigma_equality_jacobian(double K, double nprime, double theta, double j0, double j1,
                                             const std::vector<double>& t_grid) {
  if (!(nprime >= 1.0)) throw std::invalid_argument("sigma_equality_jacobian: N' must be >= 1");
  if (!(j0 > 0.0 && j1 > 0.0)) throw std::invalid_argument("sigma_equality_jacobian: endpoint values must be > 0");
  const auto y = comparison_ode(K * theta * theta / nprime, std::pow(j0, 1.0 / nprime), std::pow(j1, 1.0 / nprime),
                                t_grid);
  std::vector<JSample> out;
  for (std::size_t k = 0; k < t_grid.size(); ++k) out.push_back({t_grid[k], std::pow(y[k], nprime)});
  return out;
}

std::vector<double> tau_equality_root(double K, double nprime, double theta, double j0, double j1,
                                      const std::vector<double>& t_grid) {
  if (!(nprime > 1.0)) throw std::invalid_argument("tau_equality_root: N' must be > 1");
  if (!(j0 >= 0.0 && j1 >= 0.0)) throw std::invalid_argument("tau_equality_root: endpoint values must be >= 0");
  require_grid(t_grid, "tau_equality_root");
  const double c = K * theta * theta / (nprime - 1.0);

  // Cone from the t = 0 end: a(0) = 1, a(1) = 0 and d(0) = j0, d(1) = 0.
  const auto cone_root = [&](double j, const std::vector<double>& grid) {
    const auto a = comparison_ode(0.0, 1.0, 0.0, grid);
    const auto y = comparison_ode(c, std::pow(j, 1.0 / (nprime - 1.0)), 0.0, grid);
    std::vector<double> r(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double d = std::pow(std::max(y[k], 0.0), nprime - 1.0);
      r[k] = std::pow(std::max(a[k], 0.0) * d, 1.0 / nprime);
    }
    return r;
  };

  std::vector<double> reversed(t_grid.rbegin(), t_grid.rend());
  for (auto& s : reversed) s = 1.0 - s;
  const auto from0 = cone_root(j0, t_grid);
  const auto from1 = cone_root(j1, reversed);
  std::vector<double> out(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) out[k] = from0[k] + from1[t_grid.size() - 1 - k];
  return out;
}

CheckReport verify_distortion_concavity(const std::vector<JSample>& samples, double theta, double K, double nprime,
                                        Coefficient coefficient) {
  if (samples.size() < 3) throw std::invalid_argument("verify_distortion_concavity: need at least 3 samples");
  if (!(theta > 0.0)) throw std::invalid_argument("verify_distortion_concavity: theta must be > 0");
  if (!(nprime >= 1.0)) throw std::invalid_argument("verify_distortion_concavity: N' must be >= 1");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!(samples[k].j > 0.0)) throw std::invalid_argument("verify_distortion_concavity: j must be > 0");
    if (k > 0 && !(samples[k].t > samples[k - 1].t)) {
      throw std::invalid_argument("verify_distortion_concavity: times must be strictly increasing");
    }
  }
  if (samples.front().t != 0.0 || samples.back().t != 1.0) {
    throw std::invalid_argument("verify_distortion_concavity: grid must start at 0 and end at 1");
  }
  const bool use_tau = coefficient == Coefficient::tau;

  CheckReport report;
  report.name = "distortion_concavity";
  report.spec = {{"K", K}, {"Nprime", nprime}, {"theta", theta}, {"coefficient", use_tau ? "tau" : "sigma"}};
  report.tolerance = 1e-8;

  // (a) on uniform grids only.
  const double h = samples[1].t - samples[0].t;
  bool uniform = true;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (std::abs(samples[k].t - samples[k - 1].t - h) > 1e-12) uniform = false;
  }
  const double bound = -K * theta * theta;
  const double hyp_tol = std::max(1e-3, 10.0 * h * h) * (1.0 + std::abs(bound));
  bool hypothesis = uniform;
  auto hyp = nlohmann::json::array();
  if (uniform) {
    for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
      const double pm = std::log(samples[k - 1].j), p0 = std::log(samples[k].j), pp = std::log(samples[k + 1].j);
      const double d2 = (pp - 2.0 * p0 + pm) / (h * h);
      const double d1 = (pp - pm) / (2.0 * h);
      const double value = d2 + d1 * d1 / nprime;
      const bool holds = value <= bound + hyp_tol;
      hypothesis = hypothesis && holds;
      hyp.push_back({{"t", samples[k].t}, {"value", value}, {"bound", bound}, {"holds", holds}});
    }
  }
  report.discretization = {{"h", h}, {"hypothesis_tolerance", hyp_tol}, {"hypothesis", hyp},
                           {"hypothesis_holds", hypothesis}};

  // (b) at every interior node.
  const double r0 = std::pow(samples.front().j, 1.0 / nprime);
  const double r1 = std::pow(samples.back().j, 1.0 / nprime);
  for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
    const double t = samples[k].t;
    const coeffs::CoeffParams pa{K, nprime, 1.0 - t, theta};
    const coeffs::CoeffParams pb{K, nprime, t, theta};
    const ExtReal a = use_tau ? coeffs::tau_coeff(pa) : coeffs::sigma(pa);
    const ExtReal b = use_tau ? coeffs::tau_coeff(pb) : coeffs::sigma(pb);
    CheckEntry e;
    e.label = use_tau ? "j^(1/N') >= tau combination" : "j^(1/N') >= sigma combination";
    e.t = t;
    e.nprime = nprime;
    e.lhs = std::pow(samples[k].j, 1.0 / nprime);
    e.rhs = a.scaled(r0) + b.scaled(r1);
    e.coefficient_blowup = !a.is_finite() || !b.is_finite();
    e.margin = e.lhs - e.rhs;
    report.add(std::move(e));
  }

  if (!uniform) report.notes.push_back("non-uniform grid: the differential hypothesis was not evaluated");
  if (!report.pass && !hypothesis) {
    report.notes.push_back("the differential hypothesis fails on the grid, so the inequality is not required");
    report.pass = true;
  }
  return report;
}

std::string jacobian_to_csv(const std::vector<std::vector<JacobianRecord>>& lines) {
  std::ostringstream out;
  out.precision(17);
  out << "line,t,j,phi\n";
  for (std::size_t l = 0; l < lines.size(); ++l) {
    for (const auto& r : lines[l]) out << l << ',' << r.t << ',' << r.j << ',' << r.phi << '\n';
  }
  return out.str();
}

}  // namespace lorot::smooth
