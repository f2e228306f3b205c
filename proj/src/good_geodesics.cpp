#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lorot/curvature.hpp"

namespace lorot {

namespace {

constexpr double kPenaltyScale = 1e-6;
constexpr double kOptimalityLoss = 1e-8;
constexpr int kPenaltyRounds = 3;

double sup_tau_between(const DiscreteMeasure& a, const DiscreteMeasure& b, const CausalKernel& kernel) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.weights[i] <= 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b.weights[j] > 0.0) best = std::max(best, kernel.tau(a.atoms[i], b.atoms[j]));
    }
  }
  return best;
}

double gain(const Coupling& c, const PairTable& table, double p) {
  double g = 0.0;
  for (const auto& e : c.entries) g += e.mass * std::pow(table.tau_at(e.row, e.col), p);
  return g;
}

struct Midpoint {
  DiscreteMeasure measure;
  double excess = 0.0;
  int penalty_rounds = 0;
};

// Midpoint of an optimal plan between a and b. When its density overshoots
// c, the LP is re-solved with a small penalty on pairs whose midpoint lands
// in overshooting cells; a re-solve is kept only if it stays optimal to
// kOptimalityLoss and lowers the excess.
Midpoint select_midpoint(const DiscreteMeasure& a, const DiscreteMeasure& b, double c, const ConditionSpec& spec,
                         const CausalKernel& kernel, const GeodesicOracle& oracle, const SampledSpace& space,
                         const CheckOptions& options) {
  const PairTable table = PairTable::build(a, b, kernel);
  const auto grid = dyadic_grid(1);
  const TransportResult base = solve_transport_table(a.weights, b.weights, table, spec.p, options.transport);
  if (!is_timelike_dualizable(base)) {
    throw DualizabilityError("good_geodesic_bisect: optimal coupling between interpolants is not chronological");
  }
  const double best_gain = gain(base.coupling, table, spec.p);

  Midpoint out;
  out.measure = interpolate(build_plan(base, a, b, oracle, grid, spec.p), 0.5);
  DensityField field = lebesgue_decomposition(out.measure, space, options.density);
  out.excess = excess_functional(field, c);

  double max_gain = 0.0;
  for (double tau : table.tau) max_gain = std::max(max_gain, std::pow(tau, spec.p));
  for (int round = 0; round < kPenaltyRounds && out.excess > 1e-12; ++round) {
    std::vector<double> penalty(table.rows * table.cols, 0.0);
    for (std::size_t i = 0; i < table.rows; ++i) {
      for (std::size_t j = 0; j < table.cols; ++j) {
        if (table.relation_at(i, j) != Relation::chronological) continue;
        const auto cell = space.locate(oracle.connect(a.atoms[i], b.atoms[j], grid).at(0.5));
        if (!cell) continue;
        penalty[i * table.cols + j] = std::max(field.at(*cell) - c, 0.0) / c;
      }
    }
    TransportOptions penalized = options.transport;
    penalized.penalty = penalty;
    penalized.penalty_weight = kPenaltyScale * max_gain;
    const TransportResult alt = solve_transport_table(a.weights, b.weights, table, spec.p, penalized);
    if (!is_timelike_dualizable(alt)) break;
    if (best_gain - gain(alt.coupling, table, spec.p) > kOptimalityLoss * std::max(best_gain, 1e-300)) break;
    DiscreteMeasure mid = interpolate(build_plan(alt, a, b, oracle, grid, spec.p), 0.5);
    DensityField alt_field = lebesgue_decomposition(mid, space, options.density);
    const double alt_excess = excess_functional(alt_field, c);
    out.penalty_rounds = round + 1;
    if (!(alt_excess < out.excess)) break;
    out.measure = std::move(mid);
    field = std::move(alt_field);
    out.excess = alt_excess;
  }
  return out;
}

void relative_entry(CheckReport& report, const char* label, double t, double nprime, double lhs, double rhs) {
  const double scale = std::max(std::abs(rhs), 1e-300);
  report.add({.label = label, .t = t, .nprime = nprime, .lhs = lhs, .rhs = rhs, .margin = (rhs - lhs) / scale});
}

}  // namespace

GoodGeodesicResult good_geodesic_bisect(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                        const ConditionSpec& spec, unsigned depth, const CausalKernel& kernel,
                                        const GeodesicOracle& oracle, const SampledSpace& space,
                                        const CheckOptions& options) {
  spec.validate();
  if (depth < 1 || depth > 12) throw std::invalid_argument("good_geodesic_bisect: depth must lie in [1, 12]");
  if (!mu0.is_ac || !mu1.is_ac) throw std::invalid_argument("good_geodesic_bisect: measures must be absolutely continuous");
  if (!is_strongly_dualizable_sufficient(mu0, mu1, kernel)) {
    throw DualizabilityError("good_geodesic_bisect: supports are not entirely chronologically related");
  }
  const double k_minus = std::max(-spec.K, 0.0);
  const double D = sup_tau_between(mu0, mu1, kernel);
  const double growth = D * std::sqrt(k_minus * spec.N);
  const std::size_t n = std::size_t{1} << depth;

  std::vector<DiscreteMeasure> measures(n + 1);
  std::vector<double> sups(n + 1, 0.0);
  measures[0] = mu0;
  measures[n] = mu1;
  sups[0] = lebesgue_decomposition(mu0, space, options.density).sup();
  sups[n] = lebesgue_decomposition(mu1, space, options.density).sup();
  const double threshold = std::exp(growth / 2.0) * std::max(sups[0], sups[n]);

  int penalty_rounds = 0;
  for (std::size_t step = n; step >= 2; step /= 2) {
    const double length = static_cast<double>(step) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; k += step) {
      const std::size_t mid = k + step / 2;
      const double c = std::exp(length * growth / 4.0) * std::max(sups[k], sups[k + step]);
      Midpoint m = select_midpoint(measures[k], measures[k + step], c, spec, kernel, oracle, space, options);
      penalty_rounds += m.penalty_rounds;
      sups[mid] = lebesgue_decomposition(m.measure, space, options.density).sup();
      measures[mid] = std::move(m.measure);
    }
  }

  GoodGeodesicResult out;
  out.threshold = threshold;
  const auto grid = dyadic_grid(options.curve_levels);
  for (std::size_t k = 0; k < n; ++k) {
    const TransportResult r = solve_lp_optimal(measures[k], measures[k + 1], spec.p, kernel, options.transport);
    if (!is_timelike_dualizable(r)) throw DualizabilityError("good_geodesic_bisect: segment coupling is not chronological");
    out.segments.push_back(build_plan(r, measures[k], measures[k + 1], oracle, grid, spec.p));
  }

  CheckReport& report = out.report;
  report.name = "good_geodesic";
  report.spec = spec.to_json();
  report.spec["depth"] = depth;
  report.tolerance = options.tolerance(space);
  report.discretization = {{"h", space.cell_diameter()},
                           {"eps", report.tolerance},
                           {"density", to_string(options.density)},
                           {"D", D},
                           {"threshold", threshold},
                           {"penalty_rounds", penalty_rounds},
                           {"margin", "density rows relative to the threshold; excess rows absolute"}};
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n);
    const DensityField field = lebesgue_decomposition(measures[k], space, options.density);
    DyadicInterpolant di{t, measures[k], field.sup(), excess_functional(field, threshold)};
    relative_entry(report, "sup rho_t <= threshold", t, spec.N, di.sup_density, threshold);
    report.add({.label = "F_c(mu_t) = 0", .t = t, .nprime = spec.N, .lhs = di.excess, .rhs = 0.0,
                .margin = -di.excess});
    out.interpolants.push_back(std::move(di));
  }
  return out;
}

GoodGeodesicResult tmcp_good_geodesic(const DiscreteMeasure& mu0, const Event& x1, const ConditionSpec& spec,
                                      unsigned depth, const CausalKernel& kernel, const GeodesicOracle& oracle,
                                      const SampledSpace& space, const CheckOptions& options) {
  spec.validate();
  if (depth < 1 || depth > 12) throw std::invalid_argument("tmcp_good_geodesic: depth must lie in [1, 12]");
  if (!mu0.is_ac) throw std::invalid_argument("tmcp_good_geodesic: mu0 must be absolutely continuous");
  const auto grid = dyadic_grid(options.curve_levels);
  GeodesicPlan plan = build_product_plan(mu0, x1, kernel, oracle, grid, spec.p);
  const double k_minus = std::max(-spec.K, 0.0);
  const double D = sup_tau_between(mu0, DiscreteMeasure::dirac(x1), kernel);
  const DensityField rho0 = lebesgue_decomposition(mu0, space, options.density);
  const double sup0 = rho0.sup();
  const double s0 = renyi_entropy(rho0, spec.N);
  const std::size_t n = std::size_t{1} << depth;

  GoodGeodesicResult out;
  out.threshold = sup0;
  CheckReport& report = out.report;
  report.name = "tmcp_good_geodesic";
  report.spec = spec.to_json();
  report.spec["depth"] = depth;
  report.spec["x1"] = std::vector<double>(x1.coords().begin(), x1.coords().end());
  report.tolerance = options.tolerance(space);
  report.discretization = {{"h", space.cell_diameter()},
                           {"eps", report.tolerance},
                           {"density", to_string(options.density)},
                           {"D", D},
                           {"margin", "relative to |rhs|"}};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n);
    DiscreteMeasure mu_t = interpolate(plan, t);
    const DensityField field = lebesgue_decomposition(mu_t, space, options.density);
    const double bound = std::pow(1.0 - t, -spec.N) * std::exp(D * t * std::sqrt(k_minus * spec.N)) * sup0;
    relative_entry(report, "sup rho_t <= (1-t)^-N e^{Dt sqrt(K^- N)} sup rho_0", t, spec.N, field.sup(), bound);
    const double s_bound = (1.0 - t) * std::exp(-D * t * std::sqrt(k_minus / spec.N)) * s0;
    relative_entry(report, "S_N(mu_t) <= (1-t) e^{-Dt sqrt(K^-/N)} S_N(mu_0)", t, spec.N, renyi_entropy(field, spec.N),
                   s_bound);
    out.interpolants.push_back({t, std::move(mu_t), field.sup(), 0.0});
  }
  out.segments.push_back(std::move(plan));
  return out;
}

CheckReport mutual_singularity_probe(const std::vector<GeodesicPlan>& plans, const std::vector<double>& t_grid,
                                     const SampledSpace& space) {
  CheckReport report;
  report.name = "mutual_singularity";
  report.spec = {{"plans", plans.size()}, {"t_grid", t_grid}};
  report.tolerance = 0.0;
  report.discretization = {{"h", space.cell_diameter()}, {"density", "nearest_cell"}};

  const auto cell_masses = [&](const DiscreteMeasure& mu) {
    std::vector<double> m(space.size(), 0.0);
    const DensityField f = density_estimate(mu, space, DensityMethod::nearest_cell);
    for (std::size_t k = 0; k < f.cells.size(); ++k) m[f.cells[k]] = f.density[k] * f.cell_mass[k];
    return m;
  };
  const auto overlap_at = [&](double t) {
    std::vector<std::vector<double>> masses;
    for (const auto& plan : plans) masses.push_back(cell_masses(interpolate(plan, t)));
    double overlap = 0.0;
    for (std::size_t a = 0; a < masses.size(); ++a) {
      for (std::size_t b = a + 1; b < masses.size(); ++b) {
        for (std::size_t c = 0; c < space.size(); ++c) overlap += std::min(masses[a][c], masses[b][c]);
      }
    }
    return overlap;
  };
  if (overlap_at(0.0) > 0.0 || overlap_at(1.0) > 0.0) {
    report.notes.push_back("endpoint measures are not mutually singular");
  }
  for (double t : t_grid) {
    if (!(t > 0.0 && t < 1.0)) continue;
    const double overlap = overlap_at(t);
    report.add({.label = "cell overlap of interpolants", .t = t, .lhs = overlap, .rhs = 0.0, .margin = -overlap});
  }
  return report;
}

}  // namespace lorot
