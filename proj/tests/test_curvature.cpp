#include <cmath>

#include <doctest.h>

#include "lorot/coeffs.hpp"
#include "lorot/curvature.hpp"

using namespace lorot;

namespace {

const auto kKernel = minkowski_kernel(1);
const auto kOracle = minkowski_oracle();

// t in [-1, 7], x in [-4, 4] at 64 x 64: cell side 1/8.
const SampledSpace& window() {
  static const auto s = build_grid_space(Box{{{-1, 7}, {-4, 4}}}, {64, 64});
  return s;
}

DiscreteMeasure square(double t0, double x0, double side) {
  const Box b{{{t0 - side / 2, t0 + side / 2}, {x0 - side / 2, x0 + side / 2}}};
  return DiscreteMeasure::uniform_on_cells(window(), window().indices_in_box(b));
}

ConditionSpec spec(Variant v, double K, std::vector<double> np, std::vector<double> t = {0.25, 0.5, 0.75}) {
  ConditionSpec s;
  s.variant = v;
  s.K = K;
  s.N = 2;
  s.p = 0.5;
  s.nprime_grid = std::move(np);
  s.t_grid = std::move(t);
  return s;
}

}  // namespace

TEST_CASE("condition spec validation and JSON") {
  ConditionSpec s;
  CHECK(s.nprimes() == std::vector<double>{2, 3, 4, 20});
  CHECK(s.times().size() == 5);
  s.p = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.p = 0.5;
  s.t_grid = {0.3};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.t_grid = {0.375};
  s.nprime_grid = {1.5};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.nprime_grid = {3};
  const auto back = ConditionSpec::from_json(s.to_json());
  CHECK(back.t_grid == s.t_grid);
  CHECK(back.variant == s.variant);
  CHECK(variant_from_string("TMCP_entropic") == Variant::TMCP_entropic);
  CHECK_THROWS(variant_from_string("nope"));
  CHECK(uses_tau_coefficients(Variant::TCD_full));
  CHECK_FALSE(uses_tau_coefficients(Variant::TCD_reduced));
}

TEST_CASE("TCD along a flat translation is an equality") {
  const auto mu0 = square(0, 0, 1), mu1 = square(4, 0, 1);
  CheckOptions opt;
  opt.eps = 0.05;
  for (auto v : {Variant::TCD_reduced, Variant::TCD_full, Variant::TCD_entropic}) {
    const auto r = check_tcd(mu0, mu1, spec(v, 0, {2, 3}), kKernel, kOracle, window(), opt);
    CHECK(r.pass);
    for (const auto& e : r.entries) CHECK(std::abs(e.margin.value()) < 1e-9);
  }
}

TEST_CASE("TCD with K above the diameter bound reports coefficient blowup") {
  const auto r = check_tcd(square(0, 0, 1), square(4, 0, 1), spec(Variant::TCD_reduced, 2, {2}), kKernel, kOracle,
                           window());
  CHECK_FALSE(r.pass);
  REQUIRE_FALSE(r.entries.empty());
  CHECK(r.entries[0].coefficient_blowup);
  CHECK(r.entries[0].rhs.is_neg_inf());
  REQUIRE_FALSE(r.notes.empty());
  CHECK(r.notes.back().rfind("witness search exhausted", 0) == 0);
  CHECK_FALSE(r.notes.empty());
}

TEST_CASE("TCD rejects non-absolutely-continuous or non-dualizable inputs") {
  CHECK_THROWS_AS(check_tcd(DiscreteMeasure::dirac({0, 0}), square(4, 0, 1), spec(Variant::TCD_reduced, 0, {2}),
                            kKernel, kOracle, window()),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_tcd(square(0, 0, 1), square(0, 3, 1), spec(Variant::TCD_reduced, 0, {2}), kKernel, kOracle,
                            window()),
                  DualizabilityError);
  CHECK_THROWS_AS(check_tcd(square(0, 0, 1), square(4, 0, 1), spec(Variant::TMCP_reduced, 0, {2}), kKernel, kOracle,
                            window()),
                  std::invalid_argument);
}

TEST_CASE("TMCP contraction toward a Dirac") {
  CheckOptions opt;
  opt.eps = 0.02;
  opt.density = DensityMethod::footprint;
  const auto r2 = check_tmcp(square(0, 0, 1), {4, 0}, spec(Variant::TMCP_reduced, 0, {2}), kKernel, kOracle, window(),
                             opt);
  CHECK(r2.pass);
  for (const auto& e : r2.entries) {
    CHECK(e.lhs.value() == doctest::Approx(-(1 - e.t)).epsilon(1e-9));
    CHECK(std::abs(e.margin.value()) < 1e-9);
  }
  const auto r3 = check_tmcp(square(0, 0, 1), {4, 0}, spec(Variant::TMCP_reduced, 0, {3}), kKernel, kOracle, window(),
                             opt);
  CHECK(r3.pass);
  for (const auto& e : r3.entries) {
    CHECK(e.margin.value() == doctest::Approx(std::pow(1 - e.t, 2.0 / 3.0) - (1 - e.t)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(check_tmcp(square(0, 0, 1), {0.5, 3}, spec(Variant::TMCP_reduced, 0, {2}), kKernel, kOracle,
                             window()),
                  std::invalid_argument);
}

TEST_CASE("pathwise and midpoint checks on the translation") {
  const auto mu0 = square(0, 0, 1), mu1 = square(4, 0, 1);
  const auto res = solve_lp_optimal(mu0, mu1, 0.5, kKernel);
  const auto plan = build_plan(res, mu0, mu1, kOracle, dyadic_grid(4), 0.5);
  const auto r = check_pathwise(plan, density_estimate(mu0, window()), density_estimate(mu1, window()),
                                spec(Variant::pathwise_full, 0, {2, 3}), kKernel, window());
  CHECK(r.pass);
  for (const auto& e : r.entries) CHECK(std::abs(e.margin.value()) < 1e-9);

  const auto m = midpoint_check(mu0, mu1, spec(Variant::TCD_reduced, 0, {2}), kKernel, kOracle, window());
  CHECK(m.pass);
  CHECK(std::abs(m.worst_margin.value()) < 1e-9);
  const auto mk = midpoint_check(mu0, mu1, spec(Variant::TCD_reduced, -1, {2}), kKernel, kOracle, window());
  CHECK(mk.pass);
  CHECK_THROWS(midpoint_check(square(0, 0, 1), square(0, 3, 1), spec(Variant::TCD_reduced, 0, {2}), kKernel, kOracle,
                              window()));
}

TEST_CASE("Bonnet-Myers bounds") {
  const auto b = bonnet_myers_bound(coeffs::kPiSquared, 2);
  CHECK(b.full == doctest::Approx(1.0));
  CHECK(b.reduced == doctest::Approx(std::sqrt(2.0)));
  CHECK(bonnet_myers_bound(1, 1).full == 0.0);
  CHECK_THROWS(bonnet_myers_bound(0, 2));
  const auto s = build_grid_space(Box{{{0, 8}, {-1, 1}}}, {16, 4});
  const auto r = bonnet_myers_check(s, kKernel, 1, 2);
  CHECK_FALSE(r.pass);
  CHECK(scan_sup_tau(s, kKernel) > 7.0);
  CHECK(bonnet_myers_check(s, kKernel, 0.01, 2).pass);
}

TEST_CASE("Brunn-Minkowski for congruent squares") {
  const auto& s = window();
  const auto A0 = s.indices_in_box(Box{{{-0.5, 0.5}, {-0.5, 0.5}}});
  const auto A1 = s.indices_in_box(Box{{{3.5, 4.5}, {-0.5, 0.5}}});
  CheckOptions opt;
  opt.eps = 0.05;
  const auto r = brunn_minkowski(A0, A1, 0.5, 0, {2, 4}, kKernel, kOracle, s, opt);
  CHECK(r.pass);
  CHECK(r.discretization["mass_At"].get<double>() == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS(brunn_minkowski(A0, A0, 0.5, 0, {2}, kKernel, kOracle, s, opt));
}

TEST_CASE("Bishop-Gromov on a coarse diamond") {
  const double T = 4, h = T / 128;
  const auto s = build_grid_space(Box{{{-h / 2, T - h / 2}, {-2, 2}}}, {128, 128});
  const auto E = causal_diamond(s, kKernel, {0, 0}, {T, 0});
  CheckOptions opt;
  opt.eps = 0.05;
  const auto r = bishop_gromov({0, 0}, E, 1, 2, 0, 2, 0.05, s, kKernel, kOracle, opt);
  CHECK(r.pass);
  CHECK(r.discretization["v_r"].get<double>() == doctest::Approx(0.5 * (1 + 2 * std::log(4.0))).epsilon(0.02));
  CHECK_THROWS(bishop_gromov({0, 0}, E, 2, 1, 0, 2, 0.05, s, kKernel, kOracle, opt));
}

TEST_CASE("good geodesic on a translation keeps the threshold") {
  CheckOptions opt;
  opt.density = DensityMethod::footprint;
  const auto g = good_geodesic_bisect(square(0, 0, 1), square(4, 0, 1), spec(Variant::TCD_reduced, 0, {2}), 2, kKernel,
                                      kOracle, window(), opt);
  CHECK(g.report.pass);
  CHECK(g.threshold == doctest::Approx(1.0));
  CHECK(g.interpolants.size() == 5);
  for (const auto& it : g.interpolants) {
    CHECK(it.sup_density <= 1.0 + 1e-9);
    CHECK(it.excess <= 1e-9);
  }
  const auto gk = good_geodesic_bisect(square(0, 0, 1), square(4, 0, 1), spec(Variant::TCD_reduced, -1, {2}), 2,
                                       kKernel, kOracle, window(), opt);
  CHECK(gk.report.pass);
  CHECK(gk.threshold > 1.0);
}

TEST_CASE("mutual singularity probe") {
  const auto& s = window();
  const auto mk = [&](double x) {
    const auto a = square(0, x, 1), b = square(4, x, 1);
    return build_plan(solve_lp_optimal(a, b, 0.5, kKernel), a, b, kOracle, dyadic_grid(3), 0.5);
  };
  const std::vector<double> ts{0.125, 0.5, 0.875};
  const auto disjoint = mutual_singularity_probe({mk(-1), mk(1)}, ts, s);
  CHECK(disjoint.pass);
  CHECK(disjoint.worst_margin.value() == doctest::Approx(0.0));
  const auto dup = mutual_singularity_probe({mk(1), mk(1)}, ts, s);
  CHECK_FALSE(dup.pass);
}
