#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lorot/coeffs.hpp"
#include "lorot/curvature.hpp"

namespace lorot {

namespace {

std::vector<char> membership(std::span<const std::size_t> set, std::size_t n) {
  std::vector<char> in(n, 0);
  for (auto i : set) {
    if (i >= n) throw std::invalid_argument("point index out of range");
    in[i] = 1;
  }
  return in;
}

double set_mass(std::span<const std::size_t> set, const SampledSpace& space) {
  double m = 0.0;
  for (auto i : set) m += space.mass(i);
  return m;
}

Event point_at(const GeodesicOracle& oracle, const Event& x, const Event& y, double t) {
  const double grid[3] = {0.0, t, 1.0};
  return oracle.connect(x, y, grid).samples()[1].point;
}

// True if `cell` or one of its axis neighbours belongs to the set.
bool in_set_or_neighbour(const SampledSpace& space, const std::vector<char>& in, std::size_t cell) {
  if (in[cell]) return true;
  const auto& geo = space.geometry();
  if (!geo) return false;
  const std::size_t d = geo->counts.size();
  std::vector<std::size_t> idx(d);
  std::size_t rest = cell;
  for (std::size_t a = d; a-- > 0;) {
    idx[a] = rest % geo->counts[a];
    rest /= geo->counts[a];
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (int step : {-1, 1}) {
      if (step < 0 && idx[a] == 0) continue;
      if (step > 0 && idx[a] + 1 >= geo->counts[a]) continue;
      auto n = idx;
      n[a] = step < 0 ? n[a] - 1 : n[a] + 1;
      if (in[geo->flat_index(n)]) return true;
    }
  }
  return false;
}

}  // namespace

CheckReport brunn_minkowski(std::span<const std::size_t> A0, std::span<const std::size_t> A1, double t, double K,
                            const std::vector<double>& nprime_grid, const CausalKernel& kernel,
                            const GeodesicOracle& oracle, const SampledSpace& space, const CheckOptions& options) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("brunn_minkowski: t must lie in [0, 1]");
  if (A0.empty() || A1.empty()) throw std::invalid_argument("brunn_minkowski: sets must have positive mass");
  if (nprime_grid.empty()) throw std::invalid_argument("brunn_minkowski: empty N' grid");
  const double m0 = set_mass(A0, space);
  const double m1 = set_mass(A1, space);

  std::vector<char> covered(space.size(), 0);
  double inf_tau = std::numeric_limits<double>::infinity();
  double sup_tau = 0.0;
  for (auto a : A0) {
    const Event& x = space.point(a);
    for (auto b : A1) {
      const Event& y = space.point(b);
      if (!kernel.chronological(x, y)) {
        throw std::invalid_argument("brunn_minkowski: A0 x A1 contains a non-chronological pair");
      }
      const double tau = kernel.tau(x, y);
      inf_tau = std::min(inf_tau, tau);
      sup_tau = std::max(sup_tau, tau);
      if (t == 0.0 || t == 1.0) continue;
      const auto cell = space.locate(point_at(oracle, x, y, t));
      if (!cell) throw std::invalid_argument("brunn_minkowski: A_t leaves the space window");
      covered[*cell] = 1;
    }
  }
  double mt = 0.0;
  if (t == 0.0) {
    mt = m0;
  } else if (t == 1.0) {
    mt = m1;
  } else {
    for (std::size_t i = 0; i < covered.size(); ++i) {
      if (covered[i]) mt += space.mass(i);
    }
  }
  const double theta = K < 0.0 ? sup_tau : inf_tau;

  CheckReport report;
  report.name = "brunn_minkowski";
  report.spec = {{"t", t}, {"K", K}, {"Nprime_grid", nprime_grid}};
  report.tolerance = options.tolerance(space);
  report.discretization = {{"h", space.cell_diameter()}, {"eps", report.tolerance}, {"mass_A0", m0},
                           {"mass_A1", m1},           {"mass_At", mt},           {"Theta", theta}};
  for (double np : nprime_grid) {
    for (bool tau_version : {true, false}) {
      const ExtReal a = distortion(tau_version, K, np, 1.0 - t, theta);
      const ExtReal b = distortion(tau_version, K, np, t, theta);
      CheckEntry e;
      e.label = tau_version ? "tau" : "sigma";
      e.t = t;
      e.nprime = np;
      e.lhs = std::pow(mt, 1.0 / np);
      e.rhs = a.scaled(std::pow(m0, 1.0 / np)) + b.scaled(std::pow(m1, 1.0 / np));
      e.coefficient_blowup = !a.is_finite() || !b.is_finite();
      e.margin = e.lhs - e.rhs;
      report.add(std::move(e));
    }
  }
  return report;
}

BonnetMyersBounds bonnet_myers_bound(double K, double N) {
  if (!(K > 0.0)) throw std::invalid_argument("bonnet_myers_bound: K must be > 0");
  if (!(N >= 1.0)) throw std::invalid_argument("bonnet_myers_bound: N must be >= 1");
  return {coeffs::kPi * std::sqrt((N - 1.0) / K), coeffs::kPi * std::sqrt(N / K)};
}

double scan_sup_tau(const SampledSpace& space, const CausalKernel& kernel) {
  double best = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t j = 0; j < space.size(); ++j) {
      best = std::max(best, kernel.tau(space.point(i), space.point(j)));
    }
  }
  return best;
}

CheckReport bonnet_myers_check(const SampledSpace& space, const CausalKernel& kernel, double K, double N) {
  const BonnetMyersBounds bounds = bonnet_myers_bound(K, N);
  const double sup_tau = scan_sup_tau(space, kernel);
  CheckReport report;
  report.name = "bonnet_myers";
  report.spec = {{"K", K}, {"N", N}};
  report.tolerance = 0.0;
  report.discretization = {{"h", space.cell_diameter()}, {"points", space.size()}};
  report.add({.label = "sup tau <= pi sqrt((N-1)/K)", .nprime = N, .lhs = sup_tau, .rhs = bounds.full,
              .margin = bounds.full - sup_tau});
  report.add({.label = "sup tau <= pi sqrt(N/K)", .nprime = N, .lhs = sup_tau, .rhs = bounds.reduced,
              .margin = bounds.reduced - sup_tau});
  if (!report.pass) {
    report.notes.push_back("the sampled window contains time separations beyond the diameter bound");
  }
  return report;
}

CheckReport bishop_gromov(const Event& x, std::span<const std::size_t> E, double r, double R, double K, double N,
                          double delta, const SampledSpace& space, const CausalKernel& kernel,
                          const GeodesicOracle& oracle, const CheckOptions& options) {
  if (!(r > 0.0 && r < R)) throw std::invalid_argument("bishop_gromov: radii must satisfy 0 < r < R");
  if (!(delta > 0.0)) throw std::invalid_argument("bishop_gromov: shell width must be > 0");
  if (!(N > 1.0)) throw std::invalid_argument("bishop_gromov: N must be > 1");
  if (E.empty()) throw std::invalid_argument("bishop_gromov: empty set E");
  const auto in = membership(E, space.size());

  constexpr int kStarSamples = 8;
  for (auto i : E) {
    const Event& y = space.point(i);
    if (!kernel.chronological(x, y)) continue;
    for (int k = 1; k < kStarSamples; ++k) {
      const auto cell = space.locate(point_at(oracle, x, y, static_cast<double>(k) / kStarSamples));
      if (!cell || !in_set_or_neighbour(space, in, *cell)) {
        throw std::invalid_argument("bishop_gromov: E is not tau-star-shaped with respect to x on the sampled curves");
      }
    }
  }

  double v_r = 0.0, v_R = 0.0, s_r = 0.0, s_R = 0.0;
  for (auto i : E) {
    const Event& y = space.point(i);
    if (!kernel.causal(x, y)) continue;
    const double tau = kernel.tau(x, y);
    const double m = space.mass(i);
    if (tau <= r) v_r += m;
    if (tau <= R) v_R += m;
    if (!kernel.chronological(x, y)) continue;
    if (tau >= r && tau <= r + delta) s_r += m;
    if (tau >= R && tau <= R + delta) s_R += m;
  }
  s_r /= delta;
  s_R /= delta;
  if (!(v_R > 0.0) || !(s_R > 0.0)) throw std::invalid_argument("bishop_gromov: E carries no mass at radius R");

  const double sk_full_r = coeffs::s_kappa(K / (N - 1.0), r);
  const double sk_full_R = coeffs::s_kappa(K / (N - 1.0), R);
  const double sk_red_r = coeffs::s_kappa(K / N, r);
  const double sk_red_R = coeffs::s_kappa(K / N, R);

  CheckReport report;
  report.name = "bishop_gromov";
  report.spec = {{"x", std::vector<double>(x.coords().begin(), x.coords().end())}, {"r", r}, {"R", R}, {"K", K}, {"N", N}};
  report.tolerance = options.tolerance(space);
  report.discretization = {{"h", space.cell_diameter()}, {"eps", report.tolerance}, {"delta", delta},
                           {"v_r", v_r}, {"v_R", v_R}, {"s_r", s_r}, {"s_R", s_R}};
  const auto add = [&](const char* label, double nprime, double lhs, double rhs) {
    report.add({.label = label, .nprime = nprime, .lhs = lhs, .rhs = rhs, .margin = lhs - rhs});
  };
  add("v_r/v_R >= (vol_{K,N}(r)/vol_{K,N}(R))^N", N, v_r / v_R,
      std::pow(coeffs::vol_profile(K, N, r) / coeffs::vol_profile(K, N, R), N));
  add("s_r/s_R >= (s_{K,N-1}(r)/s_{K,N-1}(R))^(N-1)", N, s_r / s_R, std::pow(sk_full_r / sk_full_R, N - 1.0));
  add("v_r/v_R >= (vol_{K,N+1}(r)/vol_{K,N+1}(R))^(N+1)", N + 1.0, v_r / v_R,
      std::pow(coeffs::vol_profile(K, N + 1.0, r) / coeffs::vol_profile(K, N + 1.0, R), N + 1.0));
  add("s_r/s_R >= (s_{K,N}(r)/s_{K,N}(R))^N", N, s_r / s_R, std::pow(sk_red_r / sk_red_R, N));
  return report;
}

}  // namespace lorot
