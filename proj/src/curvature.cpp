#include "lorot/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lorot/coeffs.hpp"

namespace lorot {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::TCD_reduced: return "TCD_reduced";
    case Variant::TCD_full: return "TCD_full";
    case Variant::TCD_entropic: return "TCD_entropic";
    case Variant::TMCP_reduced: return "TMCP_reduced";
    case Variant::TMCP_full: return "TMCP_full";
    case Variant::TMCP_entropic: return "TMCP_entropic";
    case Variant::pathwise_reduced: return "pathwise_reduced";
    case Variant::pathwise_full: return "pathwise_full";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  for (auto v : {Variant::TCD_reduced, Variant::TCD_full, Variant::TCD_entropic, Variant::TMCP_reduced,
                 Variant::TMCP_full, Variant::TMCP_entropic, Variant::pathwise_reduced, Variant::pathwise_full}) {
    if (s == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown condition variant \"" + s + "\"");
}

bool uses_tau_coefficients(Variant v) {
  return v == Variant::TCD_full || v == Variant::TMCP_full || v == Variant::pathwise_full;
}

namespace {

bool is_dyadic(double t) {
  for (int k = 0; k <= 30; ++k) {
    const double scaled = std::ldexp(t, k);
    if (scaled == std::floor(scaled)) return true;
  }
  return false;
}

bool is_entropic(Variant v) { return v == Variant::TCD_entropic || v == Variant::TMCP_entropic; }

}  // namespace

void ConditionSpec::validate() const {
  if (!std::isfinite(K)) throw std::invalid_argument("ConditionSpec: K must be finite");
  if (!(N >= 1.0) || !std::isfinite(N)) throw std::invalid_argument("ConditionSpec: N must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ConditionSpec: p must lie in (0, 1)");
  for (double np : nprime_grid) {
    if (!(np >= N)) throw std::invalid_argument("ConditionSpec: every N' must be >= N");
  }
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0) || !is_dyadic(t)) {
      throw std::invalid_argument("ConditionSpec: times must be dyadic rationals in [0, 1]");
    }
  }
}

std::vector<double> ConditionSpec::nprimes() const {
  if (!nprime_grid.empty()) return nprime_grid;
  return {N, N + 1.0, 2.0 * N, 10.0 * N};
}

std::vector<double> ConditionSpec::times() const {
  if (!t_grid.empty()) return t_grid;
  return {0.0, 0.25, 0.5, 0.75, 1.0};
}

nlohmann::json ConditionSpec::to_json() const {
  return {{"variant", to_string(variant)}, {"K", K}, {"N", N}, {"p", p}, {"Nprime_grid", nprimes()},
          {"t_grid", times()}};
}

ConditionSpec ConditionSpec::from_json(const nlohmann::json& j) {
  ConditionSpec s;
  s.variant = variant_from_string(j.value("variant", std::string("TCD_reduced")));
  s.K = j.value("K", 0.0);
  s.N = j.value("N", 2.0);
  s.p = j.value("p", 0.5);
  s.nprime_grid = j.value("Nprime_grid", std::vector<double>{});
  s.t_grid = j.value("t_grid", std::vector<double>{});
  s.validate();
  return s;
}

double CheckOptions::tolerance(const SampledSpace& space) const {
  if (eps) return *eps;
  return slack_constant * space.cell_diameter();
}

ExtReal distortion(bool tau_version, double K, double nprime, double t, double theta) {
  const coeffs::CoeffParams params{K, nprime, t, theta};
  return tau_version ? coeffs::tau_coeff(params) : coeffs::sigma(params);
}

namespace {

nlohmann::json discretization(const SampledSpace& space, double eps, const CheckOptions& options) {
  return {{"h", space.cell_diameter()}, {"eps", eps}, {"density", to_string(options.density)},
          {"curve_nodes", (std::size_t{1} << options.curve_levels) + 1}};
}

void note_witness(CheckReport& report) {
  if (!report.pass) {
    report.notes.push_back(
        "witness search exhausted: the tested plan violates the inequality; the condition is existential, so this is "
        "not a refutation");
  }
}

double density_at(const DensityField& field, const SampledSpace& space, const Event& e) {
  const auto cell = space.locate(e);
  return cell ? field.at(*cell) : 0.0;
}

// c * x with the coefficient possibly +inf; x >= 0.
ExtReal weighted(ExtReal coefficient, double x) { return coefficient.scaled(x); }

struct PairData {
  double mass;
  double tau;
  double rho0;
  double rho1;
};

std::vector<PairData> pair_data(const GeodesicPlan& plan, const DensityField& rho0, const DensityField& rho1,
                                const CausalKernel& kernel, const SampledSpace& space, bool need_rho1) {
  std::vector<PairData> out;
  out.reserve(plan.pairs.size());
  for (const auto& pr : plan.pairs) {
    PairData d{pr.mass, kernel.tau(pr.curve.front(), pr.curve.back()), density_at(rho0, space, pr.curve.front()),
               need_rho1 ? density_at(rho1, space, pr.curve.back()) : 0.0};
    if (!(d.rho0 > 0.0) || (need_rho1 && !(d.rho1 > 0.0))) {
      throw std::invalid_argument("plan endpoint carries mass where the recovered density vanishes");
    }
    out.push_back(d);
  }
  return out;
}

// -sum m [c^{(1-t)} rho0^{-1/N'} + c^{(t)} rho1^{-1/N'}]; the second term is
// skipped for contractions toward a point.
ExtReal renyi_rhs(const std::vector<PairData>& pairs, bool tau_version, double K, double nprime, double t,
                  bool with_target, bool& blowup) {
  ExtReal acc = 0.0;
  for (const auto& d : pairs) {
    acc = acc + weighted(distortion(tau_version, K, nprime, 1.0 - t, d.tau), d.mass * std::pow(d.rho0, -1.0 / nprime));
    if (with_target) {
      acc = acc + weighted(distortion(tau_version, K, nprime, t, d.tau), d.mass * std::pow(d.rho1, -1.0 / nprime));
    }
  }
  blowup = acc.is_pos_inf();
  return -acc;
}

GeodesicPlan optimal_plan(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const ConditionSpec& spec,
                          const CausalKernel& kernel, const GeodesicOracle& oracle, const CheckOptions& options,
                          TransportResult* result_out = nullptr) {
  const TransportResult result = solve_lp_optimal(mu0, mu1, spec.p, kernel, options.transport);
  if (!result.feasible) throw DualizabilityError("no causal coupling exists between the two measures");
  if (!is_timelike_dualizable(result)) {
    throw DualizabilityError("the optimal coupling charges non-chronological pairs; pair is not timelike dualizable");
  }
  if (result_out) *result_out = result;
  const auto grid = dyadic_grid(options.curve_levels);
  return build_plan(result, mu0, mu1, oracle, grid, spec.p);
}

}  // namespace

CheckReport check_tcd(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const ConditionSpec& spec,
                      const CausalKernel& kernel, const GeodesicOracle& oracle, const SampledSpace& space,
                      const CheckOptions& options) {
  spec.validate();
  if (spec.variant != Variant::TCD_reduced && spec.variant != Variant::TCD_full &&
      spec.variant != Variant::TCD_entropic) {
    throw std::invalid_argument("check_tcd: variant must be TCD_reduced, TCD_full or TCD_entropic");
  }
  if (!mu0.is_ac || !mu1.is_ac) throw std::invalid_argument("check_tcd: both measures must be absolutely continuous");
  TransportResult result;
  const GeodesicPlan plan = optimal_plan(mu0, mu1, spec, kernel, oracle, options, &result);
  const DensityField rho0 = lebesgue_decomposition(mu0, space, options.density);
  const DensityField rho1 = lebesgue_decomposition(mu1, space, options.density);
  const bool entropic = is_entropic(spec.variant);
  const bool tau_version = uses_tau_coefficients(spec.variant);

  CheckReport report;
  report.name = "check_tcd";
  report.spec = spec.to_json();
  report.tolerance = options.tolerance(space);
  report.discretization = discretization(space, report.tolerance, options);
  report.discretization["atoms0"] = mu0.size();
  report.discretization["atoms1"] = mu1.size();
  report.discretization["pivots"] = result.pivots;
  report.discretization["monge_defect"] = result.monge_defect;
  report.discretization["objective"] = to_json(result.objective);
  if (!is_strongly_dualizable_sufficient(mu0, mu1, kernel)) {
    report.notes.push_back(
        "support product is not entirely chronological; strong dualizability is not certified, only the returned "
        "coupling is chronological");
  }

  const auto pairs = entropic ? std::vector<PairData>{} : pair_data(plan, rho0, rho1, kernel, space, true);
  const double tau_l2 = plan.tau_l2(kernel);
  for (double t : spec.times()) {
    const DensityField rho_t = lebesgue_decomposition(interpolate(plan, t), space, options.density);
    for (double np : spec.nprimes()) {
      CheckEntry e;
      e.t = t;
      e.nprime = np;
      if (entropic) {
        const ExtReal a = coeffs::sigma({spec.K, np, 1.0 - t, tau_l2});
        const ExtReal b = coeffs::sigma({spec.K, np, t, tau_l2});
        e.label = "U_N(mu_t) >= sigma U_N(mu_0) + sigma U_N(mu_1)";
        e.lhs = u_n(rho_t, np);
        e.rhs = a.scaled(u_n(rho0, np)) + b.scaled(u_n(rho1, np));
        e.coefficient_blowup = !a.is_finite() || !b.is_finite();
        e.margin = e.rhs.is_pos_inf() ? ExtReal::neg_infinity() : e.lhs - e.rhs;
      } else {
        bool blowup = false;
        e.label = tau_version ? "S_N'(mu_t) <= tau-combination" : "S_N'(mu_t) <= sigma-combination";
        e.lhs = renyi_entropy(rho_t, np);
        e.rhs = renyi_rhs(pairs, tau_version, spec.K, np, t, true, blowup);
        e.coefficient_blowup = blowup;
        e.margin = e.rhs - e.lhs;
      }
      report.add(std::move(e));
    }
  }
  note_witness(report);
  return report;
}

CheckReport check_pathwise(const GeodesicPlan& plan, const DensityField& rho0, const DensityField& rho1,
                           const ConditionSpec& spec, const CausalKernel& kernel, const SampledSpace& space,
                           const CheckOptions& options) {
  spec.validate();
  if (spec.variant != Variant::pathwise_reduced && spec.variant != Variant::pathwise_full) {
    throw std::invalid_argument("check_pathwise: variant must be pathwise_reduced or pathwise_full");
  }
  const bool tau_version = uses_tau_coefficients(spec.variant);
  const auto pairs = pair_data(plan, rho0, rho1, kernel, space, true);

  CheckReport report;
  report.name = "check_pathwise";
  report.spec = spec.to_json();
  report.tolerance = options.tolerance(space);
  report.discretization = discretization(space, report.tolerance, options);
  for (double t : spec.times()) {
    const DensityField rho_t = lebesgue_decomposition(interpolate(plan, t), space, options.density);
    for (double np : spec.nprimes()) {
      ExtReal lhs = 0.0;
      ExtReal rhs = 0.0;
      double violation = 0.0;
      bool blowup = false;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& d = pairs[k];
        const double rt = density_at(rho_t, space, plan.pairs[k].curve.at(t));
        if (!(rt > 0.0)) throw std::invalid_argument("check_pathwise: interpolant density vanishes on a plan curve");
        const double left = std::pow(rt, -1.0 / np);
        const ExtReal right = weighted(distortion(tau_version, spec.K, np, 1.0 - t, d.tau), std::pow(d.rho0, -1.0 / np)) +
                              weighted(distortion(tau_version, spec.K, np, t, d.tau), std::pow(d.rho1, -1.0 / np));
        if (right.is_pos_inf()) {
          blowup = true;
          violation = std::numeric_limits<double>::infinity();
        } else {
          violation += d.mass * std::max(right.value() - left, 0.0);
        }
        lhs = lhs + ExtReal(d.mass * left);
        rhs = rhs + right.scaled(d.mass);
      }
      CheckEntry e;
      e.label = tau_version ? "rho_t^{-1/N'} >= tau-combination along curves"
                            : "rho_t^{-1/N'} >= sigma-combination along curves";
      e.t = t;
      e.nprime = np;
      e.lhs = lhs;
      e.rhs = rhs;
      e.margin = rhs.is_pos_inf() ? ExtReal::neg_infinity() : lhs - rhs;
      e.coefficient_blowup = blowup;
      e.violation = violation;
      report.add(std::move(e));
    }
  }
  note_witness(report);
  return report;
}

CheckReport check_tmcp(const DiscreteMeasure& mu0, const Event& x1, const ConditionSpec& spec,
                       const CausalKernel& kernel, const GeodesicOracle& oracle, const SampledSpace& space,
                       const CheckOptions& options) {
  spec.validate();
  if (spec.variant != Variant::TMCP_reduced && spec.variant != Variant::TMCP_full &&
      spec.variant != Variant::TMCP_entropic) {
    throw std::invalid_argument("check_tmcp: variant must be TMCP_reduced, TMCP_full or TMCP_entropic");
  }
  if (!mu0.is_ac) throw std::invalid_argument("check_tmcp: mu0 must be absolutely continuous");
  const auto grid = dyadic_grid(options.curve_levels);
  const GeodesicPlan plan = build_product_plan(mu0, x1, kernel, oracle, grid, spec.p);
  const DensityField rho0 = lebesgue_decomposition(mu0, space, options.density);
  const bool entropic = is_entropic(spec.variant);
  const bool tau_version = uses_tau_coefficients(spec.variant);
  const auto pairs = pair_data(plan, rho0, rho0, kernel, space, false);
  const double tau_l2 = plan.tau_l2(kernel);

  CheckReport report;
  report.name = "check_tmcp";
  report.spec = spec.to_json();
  report.spec["x1"] = std::vector<double>(x1.coords().begin(), x1.coords().end());
  report.tolerance = options.tolerance(space);
  report.discretization = discretization(space, report.tolerance, options);
  for (double t : spec.times()) {
    if (t >= 1.0) continue;
    const DensityField rho_t = lebesgue_decomposition(interpolate(plan, t), space, options.density);
    for (double np : spec.nprimes()) {
      CheckEntry e;
      e.t = t;
      e.nprime = np;
      if (entropic) {
        const ExtReal a = coeffs::sigma({spec.K, np, 1.0 - t, tau_l2});
        e.label = "U_N(mu_t) >= sigma U_N(mu_0)";
        e.lhs = u_n(rho_t, np);
        e.rhs = a.scaled(u_n(rho0, np));
        e.coefficient_blowup = !a.is_finite();
        e.margin = e.rhs.is_pos_inf() ? ExtReal::neg_infinity() : e.lhs - e.rhs;
      } else {
        bool blowup = false;
        e.label = tau_version ? "S_N'(mu_t) <= tau-contraction" : "S_N'(mu_t) <= sigma-contraction";
        e.lhs = renyi_entropy(rho_t, np);
        e.rhs = renyi_rhs(pairs, tau_version, spec.K, np, t, false, blowup);
        e.coefficient_blowup = blowup;
        e.margin = e.rhs - e.lhs;
      }
      report.add(std::move(e));
    }
  }
  note_witness(report);
  return report;
}

CheckReport midpoint_check(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const ConditionSpec& spec,
                           const CausalKernel& kernel, const GeodesicOracle& oracle, const SampledSpace& space,
                           const CheckOptions& options) {
  spec.validate();
  if (!mu0.is_ac || !mu1.is_ac) throw std::invalid_argument("midpoint_check: both measures must be absolutely continuous");
  if (!is_strongly_dualizable_sufficient(mu0, mu1, kernel)) {
    throw DualizabilityError("midpoint_check: supports are not entirely chronologically related");
  }
  double inf_tau = std::numeric_limits<double>::infinity();
  double sup_tau = 0.0;
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    if (mu0.weights[i] <= 0.0) continue;
    for (std::size_t j = 0; j < mu1.size(); ++j) {
      if (mu1.weights[j] <= 0.0) continue;
      const double tau = kernel.tau(mu0.atoms[i], mu1.atoms[j]);
      inf_tau = std::min(inf_tau, tau);
      sup_tau = std::max(sup_tau, tau);
    }
  }
  const double theta = spec.K < 0.0 ? sup_tau : inf_tau;
  const GeodesicPlan plan = optimal_plan(mu0, mu1, spec, kernel, oracle, options);
  const DensityField rho0 = lebesgue_decomposition(mu0, space, options.density);
  const DensityField rho1 = lebesgue_decomposition(mu1, space, options.density);
  const DensityField rho_half = lebesgue_decomposition(interpolate(plan, 0.5), space, options.density);

  CheckReport report;
  report.name = "midpoint_check";
  report.spec = spec.to_json();
  report.spec["theta"] = theta;
  report.tolerance = options.tolerance(space);
  report.discretization = discretization(space, report.tolerance, options);
  for (double np : spec.nprimes()) {
    const ExtReal c = coeffs::sigma({spec.K, np, 0.5, theta});
    const double s0 = renyi_entropy(rho0, np);
    const double s1 = renyi_entropy(rho1, np);
    CheckEntry e;
    e.label = "S_N'(mu_1/2) <= sigma^(1/2)(theta) [S_N'(mu_0) + S_N'(mu_1)]";
    e.t = 0.5;
    e.nprime = np;
    e.lhs = renyi_entropy(rho_half, np);
    e.rhs = -c.scaled(-(s0 + s1));
    e.coefficient_blowup = !c.is_finite();
    e.margin = e.rhs - e.lhs;
    report.add(std::move(e));
  }
  note_witness(report);
  return report;
}

}  // namespace lorot
